from src.core.config import get_settings, Settings
from src.core.exceptions import *
