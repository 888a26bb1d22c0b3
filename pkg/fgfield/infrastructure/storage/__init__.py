from .atomic import atomic_write_bytes, atomic_write_text, sha256_of
from .csv_codec import encode_grid, read_grid, read_header, write_grid
from .images import encode_pgm, normalize, write_pgm, write_png
from .manifest import MANIFEST_NAME, RunManifest, write_manifest

__all__ = [
    'atomic_write_bytes',
    'atomic_write_text',
    'sha256_of',
    'encode_grid',
    'read_grid',
    'read_header',
    'write_grid',
    'encode_pgm',
    'normalize',
    'write_pgm',
    'write_png',
    'MANIFEST_NAME',
    'RunManifest',
    'write_manifest',
]
