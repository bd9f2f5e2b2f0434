"""``python -m snspd_toolkit`` runs the same CLI as ``snspd-toolkit``."""

from . import main

if __name__ == "__main__":
    main()
