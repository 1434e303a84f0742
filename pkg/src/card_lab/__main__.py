from __future__ import annotations

import sys

from card_lab.cli import main

sys.exit(main())
