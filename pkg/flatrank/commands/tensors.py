"""
Plumbing commands: gen, flatten, rank.

They speak the text interchange formats on files or stdin/stdout, so

    flatrank gen cw --q 3 | flatrank flatten --p 1 | flatrank rank

runs the same pipeline as the library calls.
"""

import argparse
import logging
from pathlib import Path

from flatrank.commands.dependencies import EXIT_OK, read_stdin, write_stdout
from flatrank.core.tensor import SparseTensor, apply_factor_map
from flatrank.errors import ArgumentError
from flatrank.services import generators
from flatrank.services.koszul_service import koszul_flattening
from flatrank.services.rank_service import rank_certified, rank_exact, rank_mod_p
from flatrank.utils.formats import (
    dump_matrix,
    dump_tensor,
    load_matrix,
    load_tensor,
    read_matrix,
    read_tensor,
    write_matrix,
    write_tensor,
)

logger = logging.getLogger(__name__)


def _generate(args: argparse.Namespace) -> SparseTensor:
    if args.family == "cw":
        return generators.cw_power(args.q, args.power)
    if args.family == "w":
        return generators.w_tensor(args.q, args.j)
    if args.family == "s":
        return generators.difference_tensor(args.q, args.power)
    return generators.matmul_tensor(args.n)


def run_gen(args: argparse.Namespace) -> int:
    tensor = _generate(args)
    logger.info(f"Generated {args.family}: {tensor.nnz} entries, dims {tensor.dims}")
    if args.out is None:
        write_stdout(dump_tensor(tensor))
    else:
        write_tensor(tensor, args.out)
    return EXIT_OK


def run_flatten(args: argparse.Namespace) -> int:
    tensor = load_tensor(read_stdin()) if args.input is None else read_tensor(args.input)
    if args.phi:
        subdim, m = tensor.shape[0][0], len(tensor.shape[0])
        tensor = apply_factor_map(tensor, 0, generators.phi_map(subdim - 1, m))
    matrix = koszul_flattening(tensor, args.p)
    logger.info(f"Koszul flattening p={args.p}: {matrix.n_rows}x{matrix.n_cols}, {matrix.nnz} entries")
    if args.out is None:
        write_stdout(dump_matrix(matrix))
    else:
        write_matrix(matrix, args.out)
    return EXIT_OK


def run_rank(args: argparse.Namespace) -> int:
    matrix = load_matrix(read_stdin()) if args.input is None else read_matrix(args.input)
    if args.exact and args.certify:
        raise ArgumentError("--exact and --certify are mutually exclusive")
    if args.exact:
        result = rank_exact(matrix)
    elif args.certify:
        result = rank_certified(matrix, args.claimed_upper, args.prime)
    else:
        result = rank_mod_p(matrix, args.prime)
    print(result.model_dump_json())
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    gen = subparsers.add_parser("gen", help="Write a generator tensor in the tensor format")
    families = gen.add_subparsers(dest="family", required=True)

    cw = families.add_parser("cw", help="T_cw,q and its Kronecker powers")
    cw.add_argument("--q", type=int, required=True)
    cw.add_argument("--power", type=int, default=1)

    w = families.add_parser("w", help="Elementary tensor W_j")
    w.add_argument("--q", type=int, required=True)
    w.add_argument("--j", type=int, required=True)

    s = families.add_parser("s", help="Difference tensor S_q^(m)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--power", type=int, default=2)

    matmul = families.add_parser("matmul", help="Matrix multiplication tensor M_<n>")
    matmul.add_argument("--n", type=int, required=True)

    for family in (cw, w, s, matmul):
        family.add_argument("--out", type=Path, default=None)
        family.set_defaults(handler=run_gen)

    flatten = subparsers.add_parser("flatten", help="Koszul flattening of a tensor file")
    flatten.add_argument("--p", type=int, default=1)
    flatten.add_argument("--phi", action="store_true", help="Compress A with phi_m first (q, m from the header)")
    flatten.add_argument("--in", dest="input", type=Path, default=None)
    flatten.add_argument("--out", type=Path, default=None)
    flatten.set_defaults(handler=run_flatten)

    rank = subparsers.add_parser("rank", help="Rank of a matrix file, printed as JSON")
    rank.add_argument("--exact", action="store_true")
    rank.add_argument("--certify", action="store_true", help="Escalate through two primes and exact rank")
    rank.add_argument("--claimed-upper", type=int, default=None)
    rank.add_argument("--prime", type=int, default=None)
    rank.add_argument("--in", dest="input", type=Path, default=None)
    rank.set_defaults(handler=run_rank)
