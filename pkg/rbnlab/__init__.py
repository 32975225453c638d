"""
Create or import top-level classes/methods.
isort:skip_file
"""

# First public import block: specs and networks
from rbnlab.speccing import (
    Boundary,
    RbnParams,
    SweepConfig,
    WiringDistribution,
    parse_config,
)
from rbnlab.simulating import (
    BooleanNetwork,
    Regime,
    classify_regime,
    evolve,
    generate_network,
    step,
    theoretical_critical_p,
)

# Second public import block: measures and CTM tables
from rbnlab.measuring import (
    BlockShape,
    CtmTable,
    RandomnessReport,
    bdm,
    compressibility_rate,
    ctm_lookup,
    lzw_decode,
    lzw_encode,
    randomness_report,
    shannon_entropy,
)
from rbnlab.enumerating import (
    build_frequency_distribution,
    ctm_from_frequency,
    derive_square_table,
    enumerate_machines,
    pybdm_square_table,
    run_machine,
    square_table,
)

# Third public import block: transition diagrams, perturbations and sweeps
from rbnlab.graphing import (
    adjacency_matrix,
    build_transition_diagram,
    find_attractors,
    prestige_centrality,
)
from rbnlab.perturbing import (
    classify_aid,
    disconnect_node,
    perturbation_series,
    relative_randomness_change,
)
from rbnlab.sweeping import averaged_sweep, detect_critical_p, sweep_p, sweep_per_k
