"""Capacity region of the finite-field network and the time-sharing split."""
from ergodic_alignment.analysis import (RateRegion, binding_pairs, equivalent_form,
                                        region_contains, timeshare_split)

region = RateRegion.from_noise(5, 0.1, 4)
C = region.cap
print(f"pairwise cap C = {C:.4f}")

for rates in ([0.8 * C, 0.2 * C, 0.2 * C, 0.1 * C], [0.6 * C, 0.5 * C, 0.1 * C, 0.0]):
    inside = region_contains(region, rates)
    assert inside == equivalent_form(region, sorted(rates, reverse=True))
    print([round(r, 3) for r in rates], "member" if inside else "non-member",
          binding_pairs(region, rates)["binding_pair"])

r1 = 0.8 * C
alpha = timeshare_split(region, r1)
print(f"R1 = {r1:.3f}: symmetric scheme for {alpha:.2f} of the time, "
      f"others get {C - r1:.3f}")
