"""Player II's copy strategy in G_alpha and O_alpha against every sliced line of play by I."""

from hytw.games import copy_strategy, explicit_from_rule, full_slice_G, make_G, make_O, sweep_player_one, synthesize_strategy
from hytw.ordinals import parse_ordinal

for alpha in ["5", "w", "w*2+3", "w^2"]:
    a = parse_ordinal(alpha)
    for name, game in (("G", make_G(a)), ("O", make_O(a))):
        res = sweep_player_one(game, copy_strategy(a), 12)
        print(f"{name}_{alpha}: {res.plays} plays, II lost {res.ii_lost}, cut at horizon {res.horizon_limited}")

tree = explicit_from_rule(full_slice_G(5))
winner, _ = synthesize_strategy(tree)
print(f"G_5 with every move listed: {len(tree)} nodes, winner {winner}")
