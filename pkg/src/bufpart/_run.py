"""python -m bufpart._run: same entry as the console script."""

from ._main import main

if __name__ == "__main__":
    main()
