try:
    from importlib.metadata import version

    __version__ = version("vqc-approx-bench")
except Exception:
    __version__ = "0.1.0"
