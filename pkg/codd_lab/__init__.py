from .core.logging_config import setup_logging
from .core.config import get_settings

__version__ = "0.1.0"

_settings = get_settings()
logger = setup_logging()
