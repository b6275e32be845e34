from .pulses import (
    PulseSpec,
    PulseSequence,
    area_from_sqrt_power,
    gaussian_envelope,
    delta_pulse_propagator,
)
from .master import (
    DecoherenceParams,
    evolve,
    free_evolve,
    pulse_channel,
    randomized_ground_state,
    check_state,
    G_MINUS,
    G_PLUS,
    T_MINUS,
    T_PLUS,
)
from .counts import CountModel, sample_counts
from .experiments import (
    simulate_rabi,
    simulate_background_control,
    simulate_ramsey,
    simulate_su2_map,
)
