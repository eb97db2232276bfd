import os

# The whole suite must run with networking disabled; anything that would
# touch the wire raises NetworkError instead.
os.environ.setdefault("HECKEDIST_OFFLINE", "1")
