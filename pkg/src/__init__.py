# spinchain-qst: state transfer across engineered spin chains without medium initialization
# This allows imports like: from src.protocol import run_protocol

__version__ = "0.1.0"
