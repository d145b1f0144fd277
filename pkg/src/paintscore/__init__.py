"""paintscore: rubric-based creativity scoring for paintings.

Subpackages: rubric (scoring scaffolding and agreement), dataset (manifests,
splits, synthetic corpus), preprocess, model, training, evaluation,
reference_tables (shipped benchmark fixtures), service (rater workbench HTTP
backend), cli.
"""

__version__ = "0.1.0"

from .rubric import (  # noqa: F401
    BinningScheme,
    Consensus,
    QualityBand,
    Rating,
    RubricScore,
    band_of,
    bin_score,
    consensus,
    icc,
    scheme_catalog,
    total,
)
