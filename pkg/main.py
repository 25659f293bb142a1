#!/usr/bin/env python3
"""
Sparse SFM - command-line entry point
"""

import sys
from pathlib import Path
import logging

# Add the src directory to the Python path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

# Initialize logging
try:
    from utils.logger import setup_logging
    logger = setup_logging(level=logging.WARNING)
except Exception as e:
    logging.basicConfig(level=logging.WARNING)
    logger = logging.getLogger("sparse_sfm")
    logger.error("Failed to initialize logger: %s", e)

def main():
    """Main application entry point."""
    try:
        from cli.commands import main as cli_main
        sys.exit(cli_main(sys.argv[1:]))
    except SystemExit:
        raise
    except Exception as e:
        logger.exception("Failed to start sparse-sfm: %s", e)
        sys.exit(1)

if __name__ == "__main__":
    main()
