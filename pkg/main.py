"""
Main entry point for the KB completion toolkit.

Run with:
    python main.py <command> [flags]
"""

import sys
from pathlib import Path

# Add current directory to Python path
sys.path.append(str(Path(__file__).parent))

from cli.app import KBCCommandLine


def main():
    """Main application function"""

    # Create and run the CLI
    app = KBCCommandLine()
    sys.exit(app.run(sys.argv[1:]))


if __name__ == "__main__":
    main()
