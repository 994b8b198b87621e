"""Where the retagging construction stops working.

Prints a shrunk instance on which no valid retagged condition exists, then one
on which the construction fails although a valid output exists.
"""

from hytw.errors import RetagObstruction
from hytw.tagged_trees import generate_instance, print_condition_file, retag, retag_exists, shrink_instance


def fails(inst):
    try:
        retag(inst)
    except RetagObstruction:
        return True
    except Exception:
        return False
    return False


def show(title, inst):
    print(f"== {title}")
    print(f"alpha = {inst.alpha}, gamma = {inst.gamma}, gamma~ = {inst.gamma_tilde}")
    for name in "pqr":
        print(f"-- {name}")
        print(print_condition_file(getattr(inst, name)), end="")
    try:
        retag(inst)
    except RetagObstruction as e:
        print("construction fails:", *e.violations, sep="\n  ")
    found = retag_exists(inst)
    print("valid output:", "none" if found is None else "\n" + print_condition_file(found))


if __name__ == "__main__":
    show("seed 255, shrunk", shrink_instance(generate_instance(255), fails))
    show("seed 9641, shrunk", shrink_instance(generate_instance(9641), lambda i: fails(i) and retag_exists(i) is not None))
