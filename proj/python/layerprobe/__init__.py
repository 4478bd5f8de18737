"""Layer-wise separability analysis of verb-particle construction embeddings.

Thin wrapper over the C++ core: corpus cleaning and concordance, the
Generalized Discrimination Value, classical and SMACOF MDS, embedding
bundles, per-layer analysis and the command-line tool.
"""

from ._core import (
    Bundle,
    BundleError,
    DegenerateDataError,
    Error,
    InvalidQueryError,
    IoError,
    ValidationError,
    __version__,
    bundle_checksum,
    classical_mds,
    clean_sentence,
    extract_concordance,
    flag_outliers,
    gdv,
    known_constructions,
    main,
    pairwise_distances,
    per_layer_gdv,
    per_layer_mds,
    read_bundle,
    reference_profile,
    rescale_half_zscore,
    run_selftest,
    smacof,
    stress,
    tokenize,
    write_bundle,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
