from __future__ import annotations

import sys

from subdiff_inverse.cli import main

sys.exit(main())
