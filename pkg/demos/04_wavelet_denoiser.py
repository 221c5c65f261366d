"""Step-scaled wavelet shrinkage against overfitting on noisy data.

With noisy measurements and an oversized subspace rank, plain
alternating minimization overfits: the SNR climbs to a peak and then
decays as iterations continue fitting noise.  Interleaving a gentle
image-domain shrinkage — an undecimated Haar transform whose soft
threshold is proportional to the current gradient step — stabilizes the
tail without hurting the peak.  This script runs both variants well past
their peaks and prints the SNR milestones.

Run:  python3 demos/04_wavelet_denoiser.py   (about half a minute)
"""
import numpy as np

from hicu import (
    MaskSpec,
    PhantomSpec,
    SolverConfig,
    StageConfig,
    SwtDenoiser,
    hicu_run,
    make_mask,
    make_phantom,
)

# Clean ground truth, 15 dB-noisy measurements, 4x undersampling, and a
# rank chosen too large on purpose (20 where 12 would do).
clean, _ = make_phantom(PhantomSpec(64, 64, 4, seed=0))
noisy, _ = make_phantom(PhantomSpec(64, 64, 4, noise_db=15.0, seed=0))
mask = make_mask(MaskSpec("S1", 4.0, center_fraction=0.25, seed=0), 64, 64)
print("setup: 64x64x4 phantom, 15 dB measurement noise, S1 R=4, rank 20")


def run(denoise_on, denoiser, label):
    stages = (
        StageConfig(0.25, 8, 5, False, 10),
        StageConfig(1.0, 32, 10, denoise_on, 80),
    )
    config = SolverConfig(rank=20, stages=stages, seed=0)
    res = hicu_run(noisy, mask, config, reference=clean, denoiser=denoiser)

    # one SNR per outer iteration: the last inner record of each
    last = {}
    for t in res.trace:
        if t.inner >= last.get(t.outer, (-1, None))[0]:
            last[t.outer] = (t.inner, t.snr_db)
    series = [last[outer][1] for outer in sorted(last)]

    peak = max(series)
    t_star = int(np.argmax(series)) + 1
    print(f"{label:>22}: peak {peak:6.2f} dB at outer {t_star:3d}, "
          f"outer 90 {series[-1]:6.2f} dB, "
          f"decay after peak {peak - series[-1]:5.2f} dB")
    return series


plain = run(False, None, "plain")
swt = run(True, SwtDenoiser(threshold_scale=0.2), "wavelet shrinkage")

# ----------------------------------------------------------------------
# Side-by-side SNR trajectory at a few checkpoints.
# ----------------------------------------------------------------------
print("\n  outer    plain      SWT")
for outer in (10, 20, 30, 45, 60, 75, 90):
    print(f"  {outer:5d}  {plain[outer-1]:7.2f}  {swt[outer-1]:7.2f}")
print("\nThe shrinkage variant holds its peak; the plain variant gives "
      "ground back to the noise.")
