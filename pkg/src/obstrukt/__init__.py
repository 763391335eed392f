"""Exact-arithmetic toolkit for cohomology operations on dg-algebras over F_p.

Subpackages:
    fplinalg  -- dense exact linear algebra over prime fields
    poly      -- the polynomial / cup-1 expression grammar
    dgalg     -- compiled graded-commutative dg-algebras and their cohomology
    products  -- Massey and Frobenius obstruction products with indeterminacy
    cup1      -- lax/strict cup-1-algebra calculus and compiler
    sullivan  -- Sullivan resolutions, lifting, cotriple product sets
    corpus    -- machine-checked encodings of the worked examples
    cli       -- command-line front end
"""

__version__ = "0.1.0"
