import json

from conftest import run_without_numba
from flexmatch import USE_NUMBA, backend_name
from flexmatch.graphs import sample_graph
from flexmatch.matching import max_matching
from flexmatch.model import scenario_model

SNIPPET = """
import json
from flexmatch import backend_name
from flexmatch.graphs import sample_graph
from flexmatch.matching import max_matching
from flexmatch.model import scenario_model
g = sample_graph(scenario_model(0.6, 1.0, 5.0, "two"), 3000, seed=4)
m = max_matching(g)
print(json.dumps({"backend": backend_name(), "edges": g.to_text().count("\\ne "), "size": m.size,
                  "partners": m.matched_supply.tolist()}))
"""


def test_backend_flag():
    assert backend_name() == ("numba" if USE_NUMBA else "numpy")
    out = json.loads(run_without_numba(SNIPPET))
    assert out["backend"] == "numpy"


def test_fallback_gives_identical_graphs_and_matchings():
    out = json.loads(run_without_numba(SNIPPET))
    g = sample_graph(scenario_model(0.6, 1.0, 5.0, "two"), 3000, seed=4)
    m = max_matching(g)
    assert out["edges"] == g.edge_count and out["size"] == m.size
    assert out["partners"] == m.matched_supply.tolist()
