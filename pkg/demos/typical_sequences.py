"""How often a uniform GF(3) state sequence is delta-typical."""
from ergodic_alignment import channels, typicality

q, K, n, delta, trials = 3, 2, 2000, 0.05, 200
law = typicality.UniformLaw(q, K)
hits = 0
for i in range(trials):
    H = channels.sample_ff_states(channels.stream(i, "typicality"), q, K, n)
    hits += typicality.is_delta_typical(typicality.count_types(typicality.state_keys(H)),
                                        law, delta)
print(f"typical in {hits}/{trials} trials; guaranteed at least "
      f"{typicality.lemma1_bound(n, delta, len(law)):.3f}")
