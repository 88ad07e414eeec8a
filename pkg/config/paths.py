#!/usr/bin/env python3
"""
Centralized configuration for paths and numeric defaults.
Single source of truth for all constants used across the codebase.
"""

from pathlib import Path

# Base directories
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"
CONFIG_DIR = BASE_DIR / "config"
LIB_DIR = BASE_DIR / "lib"

# Data subdirectories
PROBLEMS_DIR = DATA_DIR / "problems"
REPORTS_DIR = BASE_DIR / "reports"

# Files
RUN_CONFIG_FILE = CONFIG_DIR / "run_config.json"

# Environment variable naming an extra run-config JSON file
CONFIG_ENV_VAR = "HOLDERREG_CONFIG"

# Numeric defaults (overridden by run_config.json, then --config / HOLDERREG_CONFIG)
DEFAULT_RUN_CONFIG = {
    'tau_mem': 1e-9,          # set membership tolerance
    'eps_pos': 1e-6,          # below this a modulus counts as zero
    'eps_inf': 1e6,           # above this a quotient counts as infinite
    'slack': 0.05,            # relative slack for single inequalities
    'chained_slack': 0.10,    # relative slack for chained estimates
    'ladder_t0': 1e-1,
    'ladder_theta': 0.5,
    'ladder_K': 20,
    'radii_r0': 0.5,
    'radii_ratio': 0.5,
    'radii_K': 12,
    'grid_size': 64,          # directions on the unit circle for n = 2
    'graph_resolution': 401,  # grid points per axis for n = 1 graph samples
    'parallel': 1,
    'seed': 0,
    'enc_cap': 30,            # max active indices for subset enumeration
    'lp_tol': 1e-9,
    'allow_high_dim': False,
    'out_dir': str(REPORTS_DIR),
}

# LSIP defaults
LSIP_SETTINGS = {
    'default_N': 720,
    'slater_box': 1e3,
    'active_tol_scale': 1e-6,
    'uniqueness_tol': 1e-6,
    'perturbation_deltas': [1e-2, 1e-3, 1e-4, 1e-5],
}

# Status glyphs shared by the CLI and the verify suite
STATUS_GLYPHS = {
    'pass': '✅',
    'fail': '❌',
    'warn': '⚠️',
}


def ensure_directories(out_dir: Path = None):
    """Create all necessary directories if they don't exist."""
    dirs_to_create = [DATA_DIR, PROBLEMS_DIR, Path(out_dir) if out_dir else REPORTS_DIR]

    for dir_path in dirs_to_create:
        dir_path.mkdir(parents=True, exist_ok=True)


if __name__ == "__main__":
    print("📁 Configuration Paths:")
    print(f"  Base: {BASE_DIR}")
    print(f"  Problems: {PROBLEMS_DIR}")
    print(f"  Reports: {REPORTS_DIR}")
    print(f"\n⚙️  Ladder: t0={DEFAULT_RUN_CONFIG['ladder_t0']} "
          f"theta={DEFAULT_RUN_CONFIG['ladder_theta']} K={DEFAULT_RUN_CONFIG['ladder_K']}")
    print(f"\n✅ All paths valid")
