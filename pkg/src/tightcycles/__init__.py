"""Tight cycles in uniform hypergraphs: detectors, line graphs, expanders and sigma-cycles."""

from .hypergraph import (
    BergeWitness,
    BudgetExceeded,
    Hypergraph,
    HypergraphFormatError,
    LooseWitness,
    Partition,
    TightCycleWitness,
    complete,
    construct,
    find_berge_cycle,
    find_loose_cycle,
    find_tight_cycle,
    is_tight_cycle,
    load_hypergraph,
    load_partition,
    random_r_partition,
)
from .linegraph import LineGraph, density, from_partite, min_degree, to_hypergraph
from .expansion import ExpanderCheck, extract_expander, find_expansion_violation, remove_coordinates
from .parameters import ParameterSet, parameter_set
from .sigma import (
    SigmaSequence,
    build_reach_digraph,
    find_sigma_cycle,
    interpolation_tuples,
    is_sigma_neighbour,
    robust_reach,
    sigma_cycle_to_tight,
    sigma_reachable,
    validate_sigma_sequence,
)
from .extremal import PipelineConfig, SearchReport, brute_force_ex, pipeline_run

__version__ = "0.1.0"
