"""
AUTOPRIV
Automated recommendation of privacy-preserving configurations for tabular data:
protect with synthetic variants, measure predictive performance and linkability,
learn meta-models and rank configurations for new datasets.
"""
__version__ = '1.0.0'

from autopriv.errors import AutoprivError  # noqa: E402
from autopriv.tabular import Dataset, load_csv  # noqa: E402

__all__ = ['AutoprivError', 'Dataset', 'load_csv', '__version__']
