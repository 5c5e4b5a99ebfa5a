"""Workbench for interpreting simply-typed lambda-terms in three models:
thin concurrent games, the relational model of non-idempotent intersection
types, and the linear Scott model of subtyping preorders — together with the
machinery relating them (collapses, structural maps, matching problems)."""

__version__ = "0.1.0"
