"""Random sequences whose k-fold representation counts have summatory
function C n**beta plus a small error, with exact counting kernels and the
shell-partition machinery used to control the error."""
from .kernel import (
    ErrorPrediction,
    LogFactor,
    Parameters,
    Regime,
    hoeffding_tail,
    power_floor,
    power_floor_array,
    predicted_error_exponent,
    volume_constant,
)
from .sequence import (
    CoverageError,
    SampledSequence,
    derive_seed,
    index_bound_for_n,
    midpoint_sequence,
    read_sequence,
    sample_sequence,
    sequence_for,
    write_sequence,
)
from .repcount import (
    MultiplicityVector,
    RepSeries,
    multiplicities,
    rep_counts,
    rep_series,
    sandwich_check,
    sandwich_scan,
    sigma_direct,
    sigma_upto,
    summatory,
    write_rep_csv,
)
from .shell import (
    Partition,
    PartitionClass,
    PartitionReport,
    ShellIndex,
    band_index,
    build_partition,
    count_shell_general,
    enumerate_shell,
    fiber_size_bound,
    verify_partition,
    y_label,
)
from .concentration import (
    DeviationSample,
    ScalingFit,
    class_D,
    empirical_deviation,
    estimate_cell_volume,
    fit_scaling,
    hoeffding_empirical,
    hoeffding_y,
    predicted_deviation,
)

__version__ = "0.1.0"
