import json
import pathlib

from polyheat.geometry import build_domain_pair

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load_pair(name):
    """Build the domain pair stored in fixtures/<name>."""
    data = json.loads((FIXTURES / name).read_text())
    return build_domain_pair(data["outer"], data["inner"], data.get("eps"))
