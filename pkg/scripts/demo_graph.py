"""Repeater counts on the four-corner demo graph.

Every admissible path there uses exactly one repeater, so the optimum needs K
repeaters when capacity is ample and |Q|/D when K=1.
"""

from pathlib import Path

from repeater_alloc import ChainRequirements, PlanOptions, load_network, plan
from repeater_alloc.requirements import Bounds

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    net = load_network(DATA / "demo4.json")
    opts = PlanOptions(bounds=Bounds(3, 0.9), canonical=True)
    print("K D repeaters chosen")
    for k, d in ((1, 6), (2, 6), (3, 6), (1, 1), (1, 2), (1, 3)):
        p = plan(net, ChainRequirements(k=k, d=d), opts)
        print(k, d, p.repeater_count, " ".join(p.repeater_nodes))


if __name__ == "__main__":
    main()
