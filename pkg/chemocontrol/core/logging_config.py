'''Package logger.'''

import logging
import sys

__all__ = [
    'logger',
    'configure_logging'
]

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

logger = logging.getLogger('chemocontrol')
logger.addHandler(logging.NullHandler())


def configure_logging(level: int | str = logging.INFO) -> logging.Logger:
    '''
    Attach a single stream handler to the package logger.

    Calling this again replaces the handler, so that it writes to whatever
    ``sys.stderr`` is at the time.
    '''
    logger.setLevel(level)
    for handler in [h for h in logger.handlers if getattr(h, '_chemocontrol', False)]:
        logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._chemocontrol = True  # type: ignore[attr-defined]
    logger.addHandler(handler)
    return logger
