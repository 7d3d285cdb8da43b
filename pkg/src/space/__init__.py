from src.space.fe_space import FESpace, build_space

__all__ = ["FESpace", "build_space"]
