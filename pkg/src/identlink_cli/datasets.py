"""
Download of the song sparrow offspring dataset.

The dataset is not redistributed with identlink. `fetch-sparrow` downloads a
whitespace-separated table from a user-supplied URL and rewrites it in the
Poisson CSV schema with columns y, const, age, age2.
"""

import asyncio
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import httpx
import pandas as pd
import typer

from identlink.errors import ParseError

from .results import reported

logger = logging.getLogger(__name__)

SPARROW_COLUMNS = ["y", "const", "age", "age2"]


class SparrowFetcher:
    """Async HTTP access to a sparrow data table."""

    def __init__(self, url: str, timeout: float = 30.0, transport: Optional[httpx.AsyncBaseTransport] = None):
        self.url = url
        self.timeout = timeout
        self.transport = transport

    async def fetch_text(self) -> str:
        """Download the raw table.

        Returns:
            Response body as text
        """
        async with httpx.AsyncClient(timeout=self.timeout, transport=self.transport, follow_redirects=True) as client:
            response = await client.get(self.url)
            response.raise_for_status()
            return response.text

    async def fetch_frame(self) -> pd.DataFrame:
        return parse_sparrow_table(await self.fetch_text())


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_sparrow_table(text: str) -> pd.DataFrame:
    """Parse `y age` or `y intercept age age2` rows; a non-numeric first line is a header."""
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if lines and not all(_is_number(token) for token in lines[0]):
        lines = lines[1:]
    if not lines:
        raise ParseError("no data rows in the downloaded table")
    width = len(lines[0])
    if width not in (2, 4):
        raise ParseError(f"expected 2 or 4 columns, found {width}", row=1)
    records: List[List[float]] = []
    for lineno, tokens in enumerate(lines, start=1):
        if len(tokens) != width:
            raise ParseError(f"expected {width} columns, found {len(tokens)}", row=lineno)
        names = SPARROW_COLUMNS if width == 4 else ["y", "age"]
        for token, name in zip(tokens, names):
            if not _is_number(token):
                raise ParseError(f"non-numeric value '{token}'", row=lineno, column=name)
        values = [float(t) for t in tokens]
        if width == 2:
            y, age = values
            values = [y, 1.0, age, age * age]
        records.append(values)
    frame = pd.DataFrame(records, columns=SPARROW_COLUMNS)
    frame["y"] = frame["y"].astype(int)
    return frame


def register_dataset_commands(app: typer.Typer):
    """Register dataset commands with the Typer app."""

    @app.command("fetch-sparrow")
    @reported
    def fetch_sparrow(
        url: str = typer.Option(..., "--url", help="Location of the whitespace-separated sparrow table"),
        out: Path = typer.Option(Path("data/sparrow.csv"), "--out", help="Where to write the CSV"),
        timeout: float = typer.Option(30.0, "--timeout", min=0.1),
    ) -> Dict[str, Any]:
        """Download the sparrow offspring table and write it as y,const,age,age2."""
        try:
            frame = asyncio.run(SparrowFetcher(url, timeout).fetch_frame())
        except httpx.HTTPStatusError as e:
            error_text = None
            try:
                error_text = e.response.json() if e.response else None
            except Exception:
                error_text = e.response.text if e.response else None

            return {
                "error": f"Failed to download sparrow data: {str(e)}",
                "status_code": e.response.status_code if e.response else None,
                "details": error_text,
            }
        except httpx.RequestError as e:
            return {"error": f"Failed to reach {url}: {str(e)}"}

        out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out, index=False, float_format="%.17g", lineterminator="\n")
        logger.info("Wrote %d sparrow rows to %s", len(frame), out)
        return {"success": True, "out": out, "rows": len(frame)}
