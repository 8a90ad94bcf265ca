import pytest

from riskbn.network import BayesNet, Cpt, NodeDef


@pytest.fixture
def two_node_net() -> BayesNet:
    """Root A with prior (0.2, 0.8); child B with rows (0.9,0.1) / (0.3,0.7)."""
    return BayesNet(
        nodes=(
            NodeDef("A", "Cause", ("a0", "a1"), "capability"),
            NodeDef("B", "Effect", ("b0", "b1"), "outcome"),
        ),
        parents={"A": (), "B": ("A",)},
        cpts={
            "A": Cpt((), ((0.2, 0.8),)),
            "B": Cpt(("A",), ((0.9, 0.1), (0.3, 0.7))),
        },
        name="two-node",
        version="1",
    )
