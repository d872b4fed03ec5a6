"""Grid-based spatial data collection under local differential privacy.

The package covers the full pipeline: geometric grids over a bounded domain
(`geo`), the local-hashing frequency oracle (`olh`), end-to-end density
collection (`collection`), adaptive two-phase grids (`adaptive`), density
queries and the average-query-error metric (`queries`), dataset ingestion and
synthesis (`data`), and a reproducible benchmark harness (`bench`, `cli`).
"""

from .adaptive import (
    AdaptiveGridParams,
    NeighborDensities,
    build_aag,
    build_privag,
    compute_g1,
    compute_g2,
    compute_hsplit,
    compute_vsplit,
    neighbor_densities,
    subdivide_aag,
    subdivide_privag,
)
from .collection import DensityEstimate, collect, true_densities
from .data import (
    GOWALLA_BBOX,
    PORTO_BBOX,
    PRESET_BBOXES,
    UNIT_SQUARE,
    CsvSource,
    DatasetSpec,
    SyntheticSource,
    load_csv,
    synth_clustered,
    synth_gaussian_mixture,
    synth_uniform,
)
from .errors import DomainError, ParameterError
from .geo import (
    Dataset,
    GeoRect,
    Grid,
    GridCell,
    GridKind,
    Location,
    build_uniform,
    intersection_area,
    locate,
    locate_points,
)
from .olh import (
    HASH_RANGE_CAP,
    HashFunctionId,
    LdpParams,
    Report,
    ReportBatch,
    estimate,
    estimate_all,
    hash_eval,
    m_for_epsilon,
    max_probability_ratio,
    output_distribution,
    perturb,
    report_many,
    support_count,
    support_counts,
    user_report,
)
from .queries import (
    DensityQuery,
    QueryWorkload,
    aqe,
    generate_workload,
    ground_truth,
    ground_truth_many,
    noisy_answer,
    noisy_answer_many,
)

__version__ = "0.1.0"
