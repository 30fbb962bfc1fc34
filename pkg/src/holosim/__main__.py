"""Module entry point so ``python -m holosim`` matches the console script."""

from holosim.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
