"""Link-level simulator and analysis toolkit for downlink NOMA-GSSK."""

__version__ = "0.1.0"

from .system import (  # noqa: F401
    AntennaSetCodebook,
    Constellation,
    PowerAllocation,
    Scheme,
    SuperposedSymbol,
    SystemConfig,
    TransmitVector,
    build_codebook,
    build_transmit_vector,
    ftpa_allocate,
    map_bits_to_set,
    modulate,
    superpose,
)
from .channel import (  # noqa: F401
    GainClass,
    NoiseSpec,
    UserChannel,
    apply_channel,
    effective_channel,
    sample_user_channels,
)
from .receivers import (  # noqa: F401
    SetDecision,
    SicTrace,
    demap_set_to_bits,
    joint_set_symbol_detect,
    ml_antenna_set_detect,
    sic_detect,
)
from .montecarlo import (  # noqa: F401
    Metric,
    SweepPoint,
    SweepResult,
    SweepSpec,
    run_ber_sweep,
    run_capacity_vs_antennas,
    run_ee_sweep,
    run_se_sweep,
    run_sweep,
)
