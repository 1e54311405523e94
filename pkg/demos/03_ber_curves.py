"""
Error-rate curves: noncoherent codebook vs pilot-based baselines
================================================================

Three schemes carry the same 6 bits per 4-symbol fading block:

  nc     one of 64 Grassmann codewords, no pilots, max-projection rule
  qpsk   1 pilot + 3 Gray QPSK symbols, LS channel estimate
  qam64  3 pilots + 1 Gray 64-QAM symbol, LS channel estimate

Pilots buy coherence but concentrate energy in predictable slots; the
noncoherent scheme spends every slot on payload and decodes without a
channel estimate. Under Rayleigh block fading the three BER curves
cross in the ways this sweep reproduces.

The trial count here is trimmed for a quick run; preset_config("desk")
and preset_config("paper") hold the full-scale settings.
"""

from grasslink import emit_plot_data, preset_config, run_ber_curve

cfg = preset_config("desk", trials_per_point=100)
print(f"schemes {cfg.schemes}, {len(cfg.snr_grid_db)} SNR points, "
      f"{cfg.trials_per_point} trials per point")

curves = run_ber_curve(cfg)

print(f"{'SNR dB':>8}  {'nc':>9}  {'qpsk':>9}  {'qam64':>9}")
for i, x in enumerate(cfg.snr_grid_db):
    row = [curves[s][i].value for s in ("nc", "qpsk", "qam64")]
    print(f"{x:8.2f}  {row[0]:9.3g}  {row[1]:9.3g}  {row[2]:9.3g}")

# At low SNR the noncoherent scheme tracks the pilot schemes closely;
# its advantage is covertness (see the detection demo), not raw BER.
flat = {f"ber_{s}": pts for s, pts in curves.items()}
paths = emit_plot_data(flat, "out_ber", cfg)
print("wrote:")
for p in paths:
    print(f"  {p}")
