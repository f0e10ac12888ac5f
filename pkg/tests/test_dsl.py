"""Parser and canonical printer for the kernel DSL."""

import pytest
from hypothesis import given, settings

from pathreg.dsl import ParseError, parse_kernel, print_kernel
from pathreg.kernels import (
    Conic,
    Matern,
    Product,
    TensorProduct,
    Warp,
    Wendland,
)

from conftest import kernel_trees


class TestParseExamples:
    def test_matern_defaults(self):
        expr = parse_kernel("matern(nu=0.5)")
        assert expr == Matern(nu=0.5)
        assert expr.dim == 1

    def test_tensor_of_wendlands(self):
        expr = parse_kernel("tensor(wendland(d=1,n=0), wendland(d=1,n=1))")
        assert expr == TensorProduct((Wendland(1, 0), Wendland(1, 1)))
        assert expr.dim == 2

    def test_unknown_name_offset(self):
        with pytest.raises(ParseError) as err:
            parse_kernel("matern(nu=0.5) + bogus(3)")
        assert err.value.offset == 17
        assert "unknown kernel name" in str(err.value)

    def test_parameter_out_of_range_names_parameter(self):
        with pytest.raises(ParseError) as err:
            parse_kernel("matern(nu=-1)")
        assert "nu" in str(err.value)
        assert "at offset" in str(err.value)

    def test_whitespace_insensitive(self):
        a = parse_kernel("2*matern(nu=0.5)+se()")
        b = parse_kernel("  2 * matern( nu = 0.5 )  +  se( )  ")
        assert a == b

    def test_weights_and_products(self):
        expr = parse_kernel("2*matern(nu=0.5) * se() + wiener()")
        assert isinstance(expr, Conic)
        assert expr.weights == (2.0, 1.0)
        assert isinstance(expr.terms[0], Product)

    def test_single_weighted_term_is_conic(self):
        expr = parse_kernel("3*se()")
        assert isinstance(expr, Conic)
        assert expr.weights == (3.0,)

    def test_parenthesised_grouping(self):
        expr = parse_kernel("(se() + wiener()) * matern(nu=1.5)")
        assert isinstance(expr, Product)
        assert isinstance(expr.factors[0], Conic)

    def test_warp_forms(self):
        expr = parse_kernel("warp(matern(nu=0.5), abs_power(beta=0.5))")
        assert isinstance(expr, Warp)
        assert expr.family == "abs_power"
        assert expr.params == (0.5,)
        affine = parse_kernel("warp(se(), affine(a=2, b=-1))")
        assert affine.params == (2.0, -1.0)

    def test_feature_identifier_value(self):
        expr = parse_kernel("feature(family=trig, degree=2)")
        assert expr.family == "trig"

    def test_error_paths(self):
        cases = [
            "matern(nu=0.5",  # unclosed paren
            "se() +",  # dangling operator
            "3",  # bare number
            "se() * 3",  # number in factor position
            "matern(0.5)",  # positional argument
            "matern(nu=0.5, nu=1.0)",  # duplicate
            "tensor(se())",  # one factor
            "warp(se(), spiral(a=1))",  # unknown warp
            "wendland(d=1)",  # missing n
            "matern(nu=0.5) se()",  # trailing input
            "se(lengthscale=monomials)",  # identifier where number expected
            "feature(family=5, degree=1)",  # number where identifier expected
            "matern(nu=0.5, colour=1)",  # unknown parameter
        ]
        for text in cases:
            with pytest.raises(ParseError):
                parse_kernel(text)

    def test_conic_weight_must_be_positive(self):
        with pytest.raises(ParseError):
            parse_kernel("-2*se()")

    def test_unexpected_character(self):
        with pytest.raises(ParseError) as err:
            parse_kernel("se() @ matern(nu=1)")
        assert err.value.offset == 5

    def test_integer_parameters_reject_fractions(self):
        with pytest.raises(ParseError):
            parse_kernel("wendland(d=1.5, n=0)")
        with pytest.raises(ParseError):
            parse_kernel("poly(m=2.7)")


class TestPrinter:
    def test_examples_print_canonically(self):
        assert print_kernel(parse_kernel("matern(nu=0.5)")) == "matern(nu=0.5)"
        assert (
            print_kernel(parse_kernel("tensor(wendland(d=1,n=0), wendland(d=1,n=1))"))
            == "tensor(wendland(d=1, n=0), wendland(d=1, n=1))"
        )
        assert print_kernel(parse_kernel("2*se()+matern(nu=1.5)")) == "2*se() + matern(nu=1.5)"

    def test_defaults_omitted(self):
        assert print_kernel(Matern(nu=2.0)) == "matern(nu=2)"
        assert print_kernel(Matern(nu=2.0, lengthscale=0.5)) == "matern(nu=2, lengthscale=0.5)"

    def test_nested_structure_parenthesised(self):
        expr = Product((Product((Matern(nu=0.5), Matern(nu=1.5))), Matern(nu=2.5)))
        text = print_kernel(expr)
        assert parse_kernel(text) == expr


@settings(max_examples=150, deadline=None)
@given(kernel_trees())
def test_print_parse_round_trip(expr):
    assert parse_kernel(print_kernel(expr)) == expr
