"""Answer service speaking the POST /v1/answer JSON contract."""

__version__ = "0.1.0"

from .app import create_app
from .backends import ScriptedBackend, Seq2SeqBackend, UnscriptedError, load_script

__all__ = [
    "__version__",
    "ScriptedBackend",
    "Seq2SeqBackend",
    "UnscriptedError",
    "create_app",
    "load_script",
]
