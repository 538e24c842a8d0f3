"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class TrConsentError(Exception):
    """Base class for all errors raised by this package."""


# --- teleo-reactive DSL / evaluation ---------------------------------------

class TrSyntaxError(TrConsentError):
    """Malformed DSL source, with position information."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class TrValidationError(TrConsentError):
    """Structurally well-formed policy violating a static invariant."""


class EvalError(TrConsentError):
    """Condition evaluation could not proceed."""


class UnsafeNegationError(EvalError):
    """Negated sub-expression evaluated with unbound variables."""


# --- authorization policies / PDP -------------------------------------------

class PolicyDocumentError(TrConsentError):
    """Canonical policy or template document rejected."""


class MalformedComparisonError(TrConsentError):
    """Comparison uses an operator or literal the attribute does not admit."""


class PolicyStateError(TrConsentError):
    """Operation illegal for the policy's current state."""


# --- templates / instantiation ----------------------------------------------

class TemplateError(TrConsentError):
    """Template library or matching failure."""


class AmbiguousTemplateError(TemplateError):
    """Two or more applicable templates tie at top specificity."""

    def __init__(self, template_ids: list[str]):
        super().__init__(
            "ambiguous template selection: " + ", ".join(sorted(template_ids))
        )
        self.template_ids = tuple(sorted(template_ids))


class OptionListError(TemplateError):
    """Requested value falls outside a template field's option list."""


class InstantiationError(TemplateError):
    """Template could not be concretized into a policy."""


# --- context hub --------------------------------------------------------------

class FactStoreError(TrConsentError):
    """Invalid fact-store mutation."""


class ClockError(TrConsentError):
    """Attempt to move the simulated clock backwards."""


class InfoPointLookupError(TrConsentError):
    """Required info-point record is absent."""


class ContextError(TrConsentError):
    """Snapshot could not be assembled (e.g. unknown location)."""


# --- lifecycle / service --------------------------------------------------------

class LifecycleError(TrConsentError):
    """Consent-session operation rejected."""


class DuplicateDecisionError(LifecycleError):
    """A consent request was answered twice."""


class UnknownRequestError(LifecycleError):
    """Decision references a request that is not pending."""


class ConfigError(TrConsentError):
    """Engine fixtures or configuration are inconsistent."""


class ScenarioError(TrConsentError):
    """Scenario trace could not be loaded or executed."""


class StoreVersionError(TrConsentError):
    """Persisted store written by an incompatible version."""


class StoreCorruptionError(TrConsentError):
    """Persisted store failed checksum or structural validation."""
