"""Exception taxonomy for becsim.

Every error raised by the package derives from BecsimError so callers can
catch the whole family with one handler. Errors carry enough context to be
actionable: config errors list every violated field, solver errors name the
point of failure.
"""

from __future__ import annotations


class BecsimError(Exception):
    """Base class for all becsim errors."""


class ConfigError(BecsimError):
    """Invalid parameters or run configuration.

    ``violations`` holds one message per violated field so a single pass
    reports everything that is wrong, not just the first problem.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IntegrationError(BecsimError):
    """ODE or master-equation integration failed; names the time reached."""

    def __init__(self, message, t_reached=None):
        self.t_reached = t_reached
        super().__init__(message)


class UndefinedObservableError(BecsimError):
    """An observable is requested where it is not defined (e.g. contrast at n=0)."""


class NoPhysicalModeError(BecsimError):
    """No decay mode passed the physicality filter; message lists all rates found."""

    def __init__(self, kappas):
        self.kappas = list(kappas)
        listing = ", ".join(f"{k:.6g}" for k in self.kappas)
        super().__init__(f"no physical decay mode among kappa = [{listing}]")


class NoResonanceError(BecsimError):
    """The resonance-matching condition has no solution for these parameters."""


class ResonanceSingularityError(BecsimError):
    """The linear-response system is singular at the requested drive frequency."""


class ConvergenceError(BecsimError):
    """An iterative or step-refinement procedure failed to reach its tolerance."""
