from flatrank.commands import properties, tensors, verify

__all__ = ["properties", "tensors", "verify"]
