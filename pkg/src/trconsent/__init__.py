"""trconsent: goal-driven consent management.

Teleo-reactive rule policies glue together the creation, activation,
withdrawal, and deletion of authorization policies instantiated on the fly
from templates, driven by consent requests and contextual information.
"""

__version__ = "0.1.0"
