from jointmaj.config import settings

__version__ = settings.VERSION
