import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# golden request/response fixtures are shared with the client's test suite
SHARED_GOLDEN = Path(__file__).parents[2] / "tests" / "golden"
