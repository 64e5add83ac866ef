"""Process-algebra dynamic logics: semantics, rewriting, model checking, satisfiability."""
