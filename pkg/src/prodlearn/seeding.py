"""Counter-based seed derivation for reproducible, schedule-independent trials.

``derive_trial_seed(master, purpose, m, trial)`` folds each input into a 64-bit
state with the SplitMix64 finalizer::

    mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
             z = (z ^ (z >> 27)) * 0x94D049BB133111EB
             return z ^ (z >> 31)                      (all mod 2^64)

    h = mix(master mod 2^64)
    for v in (purpose, m, trial):
        h = mix(h ^ ((v + 1) * 0x9E3779B97F4A7C15 mod 2^64))

``mix`` is a bijection and ``v -> (v + 1) * golden`` is injective mod 2^64, so
for a fixed (master, purpose, m) distinct trial indices never collide.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

PURPOSE_SAMPLE = 1
PURPOSE_EVENT = 16


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, purpose: int, m: int, trial_index: int) -> int:
    h = mix64(master_seed)
    for v in (purpose, m, trial_index):
        h = mix64(h ^ (((v + 1) * GOLDEN) & MASK64))
    return h
