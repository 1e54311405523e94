"""Desk-scale simulation of low-probability-of-detection links.

The library covers one transmit chain end to end: Grassmannian line
packings for noncoherent signaling, pilot-based QPSK and 64-QAM
baselines, 31-chip direct-sequence spreading, Rayleigh block fading,
receivers for both detection styles, a statistical warden running
Jarque-Bera and radiometer tests, and kernel-based KL divergence
estimation between constellation samples and Gaussian noise.
"""

from .grassmann import (
    Codebook,
    chordal_distance,
    design_codebook,
    load_codebook,
    min_distance,
    packaged_codebook,
    random_codebook,
    save_codebook,
)
from .modem import (
    FrameSpec,
    TimingEstimate,
    acquire_timing,
    despread,
    index_to_bits,
    bits_to_index,
    matched_filter,
    msequence,
    pulse_shape,
    qam64_map,
    qpsk_map,
    rotate,
    rrc_taps,
    spread,
)
from .channel import (
    ChannelState,
    apply_block_fading,
    apply_cfo,
    block_fading,
    awgn,
    fractional_chip_offset,
)
from .receivers import (
    equalize_lmmse,
    ls_channel_estimate,
    noncoherent_ml,
    slice_qam64,
    slice_qpsk,
)
from .warden import (
    CalibratedThreshold,
    DetectionOutcome,
    calibrate_jb_threshold,
    calibrate_threshold,
    complexify,
    detect_frame,
    jarque_bera,
    jb_detect,
    radiometer,
    radiometer_detect,
    radiometer_threshold,
    sample_moments,
)
from .divergence import (
    SampleCloud,
    SweepRow,
    constellation_sample_cloud,
    entry_divergence,
    gaussian_cloud,
    kl_knn,
    kl_sweep,
)
from .experiments import (
    CurvePoint,
    ExperimentConfig,
    emit_plot_data,
    ensure_jb_threshold,
    load_config,
    parse_config,
    preset_config,
    run_ber_curve,
    run_detection_curve,
    run_kl_sweep,
    save_config,
    write_kl_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CalibratedThreshold",
    "ChannelState",
    "Codebook",
    "CurvePoint",
    "DetectionOutcome",
    "ExperimentConfig",
    "FrameSpec",
    "SampleCloud",
    "SweepRow",
    "TimingEstimate",
    "acquire_timing",
    "apply_block_fading",
    "apply_cfo",
    "awgn",
    "bits_to_index",
    "block_fading",
    "calibrate_jb_threshold",
    "calibrate_threshold",
    "chordal_distance",
    "complexify",
    "constellation_sample_cloud",
    "design_codebook",
    "despread",
    "detect_frame",
    "emit_plot_data",
    "ensure_jb_threshold",
    "entry_divergence",
    "equalize_lmmse",
    "fractional_chip_offset",
    "gaussian_cloud",
    "index_to_bits",
    "jarque_bera",
    "jb_detect",
    "kl_knn",
    "kl_sweep",
    "load_codebook",
    "load_config",
    "ls_channel_estimate",
    "matched_filter",
    "min_distance",
    "msequence",
    "noncoherent_ml",
    "packaged_codebook",
    "parse_config",
    "preset_config",
    "pulse_shape",
    "qam64_map",
    "qpsk_map",
    "radiometer",
    "radiometer_detect",
    "radiometer_threshold",
    "random_codebook",
    "rotate",
    "rrc_taps",
    "run_ber_curve",
    "run_detection_curve",
    "run_kl_sweep",
    "sample_moments",
    "save_codebook",
    "save_config",
    "slice_qam64",
    "slice_qpsk",
    "spread",
    "write_kl_csv",
]
