"""edgesplit: analytical planning of DNN splits across smart sensors and an
aggregator -- network IR profiling, hardware cost modeling, split-aware
search spaces, initialization numerics, and resource-constrained
evolutionary search."""

from .netgraph import (LayerDesc, NetworkIR, ShapeMismatchError, count_ops, count_params,
                       infer_shapes, load_network, network_from_dict, network_from_json,
                       network_to_dict, network_to_json, per_layer_ops, per_layer_params,
                       save_network, split_at)
from .hwmodel import (CostReport, HardwareConfig, DEFAULT_MULTI_VIEW_HW,
                      DEFAULT_SINGLE_VIEW_HW, comm_latency, compute_latency, evaluate,
                      hardware_from_dict, hardware_to_dict, load_hardware, peak_memory)
from .fusion import NotDivisibleError, ViewBundle, deinterlace, interlace
from .initnum import SCHEMES, analytic_gains, gain_mc, variance
from .splitspace import (DEFAULT_SINGLE_VIEW_SPACE, InvalidChoiceError, PhaseChoice,
                         PhaseSpec, SearchSpace, SubNetDescriptor, descriptor_from_dict,
                         descriptor_to_dict, enumerate_space, load_descriptor, load_space,
                         materialize, sampling_plan, share_map, space_from_dict,
                         space_size, space_to_dict, split_boundary)
from .search import (EmptyPopulationError, MissingOracleEntryError, Objective,
                     ParetoFront, SearchConfig, SpaceTooLargeError, SurrogateOracle,
                     TableOracle, brute_force_best, crossover, evaluate_descriptor,
                     mutate, run, select)
from .baselines import (NoFusionLayerError, SplitDecision, all_on_aggregator,
                        all_on_sensor, list_reference_networks, load_reference_network,
                        neurosurgeon_split, split_at_fusion)

__version__ = "0.1.0"
