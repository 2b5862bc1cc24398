"""ALC theorem proving with the non-clausal connection method, plus
translation of matrix proofs into independently checkable sequent proofs."""

__version__ = "0.1.0"
