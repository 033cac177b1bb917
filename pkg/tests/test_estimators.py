import doctest

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import digraphstream
from digraphstream import fas, rankaggr, sinkfind, toposort
from digraphstream.graphcore import Ordering, count_back_edges
from digraphstream.rankaggr import RankingStream, gen_rankings
from digraphstream.sinkfind import true_sink
from digraphstream.streamgen import gen_dno, gen_dyes, gen_plantdag, stream_of
from digraphstream.toposort import gen_shortpath_instance

ESTIMATORS = [
    fas.SketchFAS(eps=0.3, random_state=1),
    fas.KwikSortFAS(n_passes=2, c=1.0, random_state=2),
    fas.DegreeOrderFAS(),
    sinkfind.MultiPassSinkFinder(p=2, random_state=0),
    sinkfind.RandomOrderSinkFinder(random_state=0),
    toposort.TournamentTopoSort(),
    toposort.PlantedDAGTopoSort(q=0.3, random_state=4),
    toposort.TransitiveReductionTopoSort(random_state=5),
    toposort.ShortPathDAG(p=3, source=0, target=1),
    rankaggr.SketchRankAggregator(eps=0.3, random_state=3),
    rankaggr.RandomPickAggregator(random_state=0),
    rankaggr.ExactKemenyAggregator(cap=10),
]


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_get_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    assert twin is not est


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_unfitted_estimator_raises(est):
    with pytest.raises(NotFittedError):
        clone(est)._result()


def test_set_params_roundtrip():
    est = fas.KwikSortFAS().set_params(n_passes=3, c=0.5)
    assert est.get_params() == {"n_passes": 3, "c": 0.5, "random_state": None}


def test_fas_estimators_fit_predict():
    t = gen_dno(7, seed=2)
    for est in (fas.SketchFAS(eps=0.3, random_state=0), fas.KwikSortFAS(random_state=0),
                fas.DegreeOrderFAS()):
        out = est.fit_predict(t)
        assert sorted(out.tolist()) == list(range(7))
        assert est.ordering_ is out
        assert est.meter_["passes_used"] >= 1


def test_sink_estimators_fit_predict():
    t = gen_dyes(81, seed=1)
    assert sinkfind.MultiPassSinkFinder(p=1).fit_predict(t) == true_sink(t)
    est = sinkfind.MultiPassSinkFinder(p=2, random_state=3).fit(t)
    assert est.sink_ in range(81)


def test_topo_estimators_fit_predict():
    inst = gen_plantdag(128, 0.3, seed=0)
    assert toposort.PlantedDAGTopoSort(q=0.3, random_state=0).fit_predict(inst) == inst.hidden_order
    assert toposort.TransitiveReductionTopoSort(random_state=1).fit_predict(inst) == inst.hidden_order
    tou = gen_dyes(20, seed=3)
    assert count_back_edges(tou, toposort.TournamentTopoSort().fit_predict(stream_of(tou))) == 0
    g, s, t = gen_shortpath_instance(30, 8, reachable=False, seed=0)
    est = toposort.ShortPathDAG(p=3, source=s, target=t, random_state=0)
    assert est.fit_predict(g) is False
    assert est.meter_["passes_used"] <= 3


def test_rank_estimators_fit_predict():
    sigmas = gen_rankings(5, 3, seed=2)
    exact = rankaggr.ExactKemenyAggregator().fit(sigmas)
    assert exact.cost_ == rankaggr.aggr_cost(exact.ordering_, sigmas)
    pick = rankaggr.RandomPickAggregator(random_state=1).fit_predict(RankingStream(5, 3, orderings=sigmas))
    assert pick in sigmas
    same = [Ordering([2, 0, 1, 4, 3])] * 2
    assert rankaggr.SketchRankAggregator(eps=0.3, random_state=0).fit_predict(same) == same[0]


@pytest.mark.parametrize("module", [fas, sinkfind, toposort, rankaggr], ids=lambda m: m.__name__)
def test_docstring_examples(module):
    failed, _ = doctest.testmod(module, verbose=False)
    assert failed == 0


def test_version():
    assert digraphstream.__version__ == "0.1.0"
