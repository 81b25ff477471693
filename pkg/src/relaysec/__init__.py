"""Secrecy-rate relay selection for multiuser MIMO buffer-aided relay networks."""

from .channel import ChannelRealization, SystemConfig, draw_realization
from .cliio import load_preset, main, parse_config, serialize_config, write_results
from .harness import SweepResult, TrialRecord, run_slot, run_trial, sweep_buffer, sweep_eta, sweep_snr
from .scheduler import bf_rjfs_select, complexity_counts, greedy_bf_rjfs_select, greedy_rjfs_select, rjfs_select

__all__ = [
    "ChannelRealization", "SystemConfig", "draw_realization",
    "load_preset", "main", "parse_config", "serialize_config", "write_results",
    "SweepResult", "TrialRecord", "run_slot", "run_trial", "sweep_buffer", "sweep_eta", "sweep_snr",
    "bf_rjfs_select", "complexity_counts", "greedy_bf_rjfs_select", "greedy_rjfs_select", "rjfs_select",
]
