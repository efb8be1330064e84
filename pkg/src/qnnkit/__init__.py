"""qnnkit: simulate, validate and train mixed quantum neural networks.

The package has three layers:

- exact simulation (``statevec``, ``encoding``, ``neurons``): a dense
  state-vector simulator plus circuit gadgets for four neuron designs,
  each paired with a closed-form forward model the simulator verifies;
- design rules (``rules``, ``arch``): a static feasibility engine that
  classifies every producer/consumer junction of an architecture into
  one of eight encoding/entanglement paths;
- learning (``model``, ``data``, ``cli``): a factorized classical
  trainer for hybrid real/binary parameters, MNIST tooling, and an
  experiment command line.
"""

__version__ = "0.1.0"

from .arch import (
    ArchitectureError,
    ArchitectureParseError,
    ArchitectureSpec,
    LayerSpec,
    load_architecture,
    parse_architecture,
    serialize_architecture,
    vp_architecture,
    vqc_architecture,
    vu_architecture,
    vup_architecture,
)
from .encoding import (
    EncodingKind,
    amplitude_encode,
    amplitude_encoding_fragment,
    decode_probabilities,
    probability_encode,
)
from .model import (
    ForwardTrace,
    ParameterStore,
    TrainConfig,
    TrainingDiverged,
    accuracy,
    backward,
    build_network_circuit,
    circuit_inference,
    expected_qubit_count,
    forward,
    init_parameters,
    load_checkpoint,
    loss,
    path6_demo,
    save_checkpoint,
    train,
)
from .neurons import (
    build_n_neuron,
    build_p_neuron,
    build_u_neuron,
    build_v_block,
    n_forward,
    p_forward,
    u_forward,
    v_forward,
)
from .rules import (
    ConnectionVerdict,
    ConsumerOp,
    Feasibility,
    JunctionProfile,
    check_connection,
    classify_path,
    validate_architecture,
)
from .statevec import (
    CircuitFragment,
    Gate,
    ResourceLimitError,
    StateVector,
    new_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
