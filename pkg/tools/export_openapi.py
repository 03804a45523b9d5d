"""Write the service's OpenAPI description to docs/openapi.json."""

import json
from pathlib import Path

from docflow.service.app import ServiceConfig, create_app


def main() -> None:
    app = create_app(ServiceConfig(data_dir="/tmp/docflow-openapi-export"))
    out = Path(__file__).parent.parent / "docs" / "openapi.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(app.openapi(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
