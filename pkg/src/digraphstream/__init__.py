"""Streaming algorithms for directed graphs and rankings.

Feedback arc sets in tournaments, sink finding, topological sorting of
tournaments and planted DAGs, and rank aggregation, each run against a
metered multi-pass edge stream.
"""

from .exceptions import (AlgorithmFailure, CapExceeded, ConfigError, DigraphStreamError,
                         NotATournamentOrder, PassBudgetExceeded, PromiseViolation,
                         RegimeError, StreamError)
from .graphcore import (Digraph, Ordering, Tournament, back_edges, count_back_edges,
                        exact_min_fas, is_acyclic_tournament, kendall_distance,
                        mediocrity_fraction, pair_index)
from .streamgen import (EdgeStream, PlantedInstance, SpaceMeter, gen_dno, gen_dyes,
                        gen_plantdag, gen_random_tournament, gen_tou, random_ordering,
                        read_edgelist, stream_of, write_edgelist)
from .l1sketch import L1Sketch
from .fas import (DegreeOrderFAS, FasResult, KwikSortFAS, SketchFAS, eps_oracle,
                  fas_degree_order, fas_kwiksort_stream, fas_one_pass_sketch)
from .sinkfind import (MultiPassSinkFinder, RandomOrderSinkFinder, sink_multipass,
                       sink_random_order_onepass)
from .toposort import (PlantedDAGTopoSort, ShortPathDAG, TournamentTopoSort,
                       TransitiveReductionTopoSort, shortpath_dag_random_order,
                       toposort_plantdag, toposort_plantdag_largeq, toposort_plantdag_smallq,
                       toposort_tournament, transitive_reduction_toposort)
from .rankaggr import (ExactKemenyAggregator, RandomPickAggregator, RankingStream,
                       SketchRankAggregator, aggr_cost, rank_aggr_exact,
                       rank_aggr_pick_random, rank_aggr_sketch)

__version__ = "0.1.0"
