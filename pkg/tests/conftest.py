import os
import tempfile

# keep the Bessel-zero cache out of the real home directory for the test run
_cache_dir = tempfile.mkdtemp(prefix="crackspec-test-cache-")
os.environ.setdefault("CRACKSPEC_CACHE_DIR", _cache_dir)
