from .dummy_logger import DummyLogger
from .file_logger import FileLogger
from .logger_base import LoggerBase
