import logging
import os
import sentry_sdk
from dotenv import load_dotenv

load_dotenv()

LOG_FILE = os.getenv('PYSLICEMON_LOG_FILE', 'PySliceMon.log')
LOG_LEVEL = logging.getLevelName(os.getenv('PYSLICEMON_LOG_LEVEL', 'INFO').upper())
if not isinstance(LOG_LEVEL, int):
    LOG_LEVEL = logging.INFO

logger = logging.getLogger()
logger.setLevel(LOG_LEVEL)

# Long sweeps report uncaught run errors to Sentry unless running locally
sentry_dsn = os.getenv('SENTRY_DSN', None)
if sentry_dsn and os.getenv('LOCAL_ENV', 'FALSE') != 'TRUE':
    sentry_sdk.init(sentry_dsn, server_name=os.getenv('SWEEP_HOST', 'PySliceMon'), traces_sample_rate=0.0)

formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

for handler in (logging.FileHandler(LOG_FILE), logging.StreamHandler()):
    handler.setLevel(LOG_LEVEL)
    handler.setFormatter(formatter)
    logger.addHandler(handler)
