"""
Tests for data-file writers
"""
import json

import numpy as np
import pandas as pd

from deltawell import __version__
from deltawell.export import (fit_trailer, format_value, metadata_lines, read_table, write_gnuplot,
                              write_table)
from deltawell.observables import ExpFitResult


def sample_frame():
    return pd.DataFrame({'t': [0.0, 0.5, 1.0], 'p_in': [0.5, 0.25, 1.0 / 3.0]})


class TestFormatting:
    """Test metadata formatting"""

    def test_floats_keep_full_precision(self):
        """Test 17 significant digits"""
        assert float(format_value(1.0 / 3.0)) == 1.0 / 3.0
        assert format_value((2.0, 4.0)) == '2.0000000000000000e+00:4.0000000000000000e+00'
        assert format_value('square') == 'square'

    def test_generated_by_first(self):
        """Test the header order"""
        lines = metadata_lines({'L': 3.0, 'mode': 'closed_form'})
        assert lines[0] == f'# generated-by=deltawell {__version__}'
        assert lines[2] == '# mode=closed_form'


class TestWriteTable:
    """Test CSV and JSON tables"""

    def test_csv_round_trip(self, tmp_path):
        """Test values and metadata come back"""
        path = write_table(sample_frame(), tmp_path / 'out' / 'survival.csv', {'L': 3.0, 'K': 0.5})
        frame, meta = read_table(path)
        assert list(frame.columns) == ['t', 'p_in']
        np.testing.assert_allclose(frame['p_in'], sample_frame()['p_in'], rtol=1e-15)
        assert float(meta['L']) == 3.0
        assert meta['generated-by'] == f'deltawell {__version__}'

    def test_deterministic(self, tmp_path):
        """Test identical inputs give identical bytes"""
        first = write_table(sample_frame(), tmp_path / 'a.csv', {'L': 3.0}).read_bytes()
        second = write_table(sample_frame(), tmp_path / 'b.csv', {'L': 3.0}).read_bytes()
        assert first == second

    def test_trailer(self, tmp_path):
        """Test the fit block follows the data"""
        result = ExpFitResult(a=0.5, b=1.25, window=(2.0, 4.0), chi2_per_dof=1e-6, n_points=21)
        path = write_table(sample_frame(), tmp_path / 'fit.csv', {}, trailer=fit_trailer(result))
        lines = path.read_text().splitlines()
        assert lines[-1] == '# n=21'
        assert lines[-5].startswith('# a=')
        _, meta = read_table(path)
        assert float(meta['b']) == 1.25

    def test_json(self, tmp_path):
        """Test the JSON layout"""
        result = ExpFitResult(a=0.5, b=1.25, window=(2.0, 4.0), chi2_per_dof=1e-6, n_points=21)
        path = write_table(sample_frame(), tmp_path / 'survival.json', {'L': np.float64(3.0)}, fmt='json',
                           trailer=fit_trailer(result))
        document = json.loads(path.read_text())
        assert document['columns'] == ['t', 'p_in']
        assert document['rows'][1] == [0.5, 0.25]
        assert document['metadata'] == {'L': 3.0}
        assert document['fit']['window'] == [2.0, 4.0]


class TestGnuplot:
    """Test gnuplot scripts"""

    def test_script(self, tmp_path):
        """Test the script plots the requested columns"""
        data = write_table(sample_frame(), tmp_path / 'survival.csv', {})
        script = write_gnuplot(data, ['t', 'p_in'], ['p_in'], 'survival probability', log_scale=True)
        text = script.read_text()
        assert script.name == 'survival.gp'
        assert "plot 'survival.csv' using 1:2 with lines" in text
        assert 'set logscale xy' in text
