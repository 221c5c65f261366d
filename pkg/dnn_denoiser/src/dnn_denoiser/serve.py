"""The stdio denoise server.

Reads HICUDNZ1 frames from stdin, answers each with one frame of the
same dimensions on stdout (coil images minus the network's noise
estimate), and loops until the input pipe closes.  On any malformed
input — wrong magic, truncated header, short payload, absurd
dimensions — it writes NOTHING and exits nonzero, so the client's
protocol checks fail fast instead of reading garbage.
"""
from __future__ import annotations

import sys

from .fileio import FormatError, pack_frame, read_frame_payload
from .model import denoise_images, load_checkpoint


def serve(checkpoint_path, stdin=None, stdout=None) -> int:
    """Run the request loop; returns the process exit code."""
    stdin = sys.stdin.buffer if stdin is None else stdin
    stdout = sys.stdout.buffer if stdout is None else stdout
    model, _ = load_checkpoint(checkpoint_path)

    def read_exact(nbytes: int) -> bytes:
        chunks = []
        got = 0
        while got < nbytes:
            chunk = stdin.read(nbytes - got)
            if not chunk:
                raise FormatError(
                    f"input closed mid-frame ({got} of {nbytes} bytes)"
                )
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    while True:
        header = stdin.read(20)
        if not header:
            return 0                      # clean end of stream
        try:
            if len(header) < 20:
                raise FormatError("truncated frame header")
            images = read_frame_payload(header, read_exact)
        except FormatError as exc:
            print(f"protocol error: {exc}", file=sys.stderr)
            return 1
        stdout.write(pack_frame(denoise_images(model, images)))
        stdout.flush()
