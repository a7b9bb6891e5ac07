"""Error types shared across the package.

ValidationError covers malformed inputs and out-of-scope requests; the CLI
maps it to exit code 2.  NumericalGuardError covers runtime guards (overflow,
ill-conditioned bases, measurement balls too small); the CLI maps it to
exit code 3.
"""


class RecdynError(Exception):
    pass


class ValidationError(RecdynError):
    pass


class NumericalGuardError(RecdynError):
    pass
