"""Process-wide numeric settings for trpcalab.

Holds the tolerances and worker counts that the tensor and algebra layers
consult. Values come from defaults, optionally overridden by environment
variables, and are shared through a lazily created global instance.
"""

import os
from dataclasses import dataclass


@dataclass
class NumericSettings:
    """Numeric knobs shared by the transform and algebra layers.

    Attributes:
        conj_symmetry_tol: Relative tolerance on the imaginary residual of an
            inverse mode-3 DFT, scaled by the Frobenius norm of the input.
        block_tol: Relative tolerance on off-block-diagonal mass in bdiag_fold.
        rank_tol_factor: Rank threshold factor; a singular value counts as
            nonzero when it exceeds rank_tol_factor * max(n(1), n3) * sigma_max.
        orthonormality_tol: Tolerance for U^* * U = I checks.
        fft_workers: Worker threads handed to scipy.fft for per-tube transforms.
    """
    conj_symmetry_tol: float = 1e-8
    block_tol: float = 1e-10
    rank_tol_factor: float = 1e-10
    orthonormality_tol: float = 1e-8
    fft_workers: int = 1

    @classmethod
    def from_environment(cls) -> "NumericSettings":
        """Build settings from defaults and TRPCALAB_* environment variables.

        Returns:
            The resulting NumericSettings.
        """
        settings = cls()
        if "TRPCALAB_FFT_WORKERS" in os.environ:
            settings.fft_workers = max(1, int(os.environ["TRPCALAB_FFT_WORKERS"]))
        if "TRPCALAB_CONJ_TOL" in os.environ:
            settings.conj_symmetry_tol = float(os.environ["TRPCALAB_CONJ_TOL"])
        if "TRPCALAB_RANK_TOL" in os.environ:
            settings.rank_tol_factor = float(os.environ["TRPCALAB_RANK_TOL"])
        return settings


# Global settings instance
_settings: NumericSettings | None = None


def get_settings() -> NumericSettings:
    """Get or create the global settings instance.

    Returns:
        The global NumericSettings instance.
    """
    global _settings
    if _settings is None:
        _settings = NumericSettings.from_environment()
    return _settings


def reset_settings() -> None:
    """Reset the global settings instance.

    Useful for testing or after changing environment variables.
    """
    global _settings
    _settings = None
