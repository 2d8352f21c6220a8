from __future__ import annotations

import logging
import sys

from src.cli import run
from src.config.settings import get_settings

logging.basicConfig(
    level=get_settings().log_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)


def main() -> None:
    logger.debug("Starting ldpc-fss with argv %s", sys.argv[1:])
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
