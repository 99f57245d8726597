"""
deltawell: exact time evolution and t^-3 decay for an infinite wall plus a repulsive delta barrier
"""
__version__ = "1.0.0"
