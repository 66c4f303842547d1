"""Command-line entry point.

Exit codes: 0 on success, 1 when the operation fails for a domain reason
(already initialised, unknown token, corrupt log, ...), 2 on usage errors.
``--output table`` renders aligned text for humans; ``machine-readable``
prints one JSON document for scripts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .api import build_app
from .config import (
    DEFAULT_KEY_BITS,
    NodeConfig,
    resolve_data_dir,
)
from .errors import MedalChainError, SchemaViolation
from .netsim import network_from_script
from .node import MedalNode
from .rsa import keygen
from .voting import APPROVE_OPTION


def _emit(args, payload: dict, rows: list[tuple[str, str]]) -> None:
    if args.output == "machine-readable":
        print(json.dumps(payload, sort_keys=True))
    else:
        width = max((len(k) for k, _ in rows), default=0)
        for key, value in rows:
            print(f"{key.ljust(width)}  {value}")


def _fail(args, code: str, message: str) -> None:
    if args.output == "machine-readable":
        print(json.dumps({"error": code, "message": message}, sort_keys=True), file=sys.stderr)
    else:
        print(f"error: {code}: {message}", file=sys.stderr)


def _data_dir(args) -> Path:
    return resolve_data_dir(args.data_dir, os.environ)


def _open_node(args) -> MedalNode:
    return MedalNode.open(_data_dir(args))


def _threshold(raw: str) -> Fraction:
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise SchemaViolation(f"threshold must be a number or ratio, got {raw!r}")


# -- command handlers ------------------------------------------------------------


def cmd_init(args) -> int:
    config = NodeConfig(
        difficulty=args.difficulty,
        quorum=args.quorum,
        threshold=_threshold(args.threshold),
        key_bits=args.key_bits,
        host=args.host,
        port=args.port,
    )
    node, _ = MedalNode.create(
        _data_dir(args), config=config, authority_id=args.authority_id, key_seed=args.key_seed
    )
    _emit(
        args,
        {
            "authority": args.authority_id,
            "data_dir": str(node.data_dir),
            "difficulty": config.difficulty,
            "tip_hash": node.ledger.tip_hash,
        },
        [
            ("data dir", str(node.data_dir)),
            ("authority", args.authority_id),
            ("difficulty", str(config.difficulty)),
            ("genesis", node.ledger.tip_hash),
        ],
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    node = _open_node(args)
    host = args.host or node.config.host
    port = args.port or node.config.port
    uvicorn.run(build_app(node), host=host, port=port, log_level="info")
    return 0


def cmd_keygen(args) -> int:
    key = keygen(args.bits, seed=args.seed)
    public = key.public.to_wire()
    if args.out:
        Path(args.out).write_text(json.dumps(key.to_wire(), indent=2, sort_keys=True) + "\n")
        payload = {"bits": args.bits, "public_key": public, "secret_file": args.out}
        rows = [
            ("bits", str(args.bits)),
            ("modulus", public["modulus"]),
            ("exponent", str(public["exponent"])),
            ("secret file", args.out),
        ]
    else:
        payload = {"bits": args.bits, "key": key.to_wire(), "public_key": public}
        rows = [
            ("bits", str(args.bits)),
            ("modulus", public["modulus"]),
            ("exponent", str(public["exponent"])),
            ("secret d", format(key.d, "x")),
        ]
    _emit(args, payload, rows)
    return 0


def cmd_define(args) -> int:
    node = _open_node(args)
    definition = node.registry.register_definition(
        name=args.name,
        icon=args.icon,
        description=args.description,
        criteria=args.criteria,
        grade_levels=[g for g in args.grades.split(",") if g],
        issuer=args.issuer,
    )
    wire = definition.to_wire()
    _emit(
        args,
        wire,
        [
            ("definition", wire["definition_id"]),
            ("name", wire["name"]),
            ("issuer", wire["issuer"]),
            ("grades", ", ".join(wire["grade_levels"])),
        ],
    )
    return 0


def cmd_mint(args) -> int:
    node = _open_node(args)
    issuer = args.issuer or node.registry.get_definition(args.definition).issuer
    token = node.registry.mint_token(args.definition, args.holder, args.grade, issuer)
    wire = token.to_wire()
    _emit(
        args,
        wire,
        [
            ("token", wire["token_id"]),
            ("holder", wire["holder"]),
            ("grade", wire["grade"]),
            ("status", wire["status"]),
            ("height", str(node.ledger.height)),
        ],
    )
    return 0


def cmd_verify(args) -> int:
    node = _open_node(args)
    report = node.registry.verify_token(args.token_id)
    ok = bool(report.get("exists")) and bool(report.get("proofs_ok"))
    rows = [("token", args.token_id), ("exists", "yes" if report.get("exists") else "no")]
    if report.get("exists"):
        rows += [
            ("status", report["status"]),
            ("certified", "yes" if report["certified"] else "no"),
            ("holder", report["holder"]),
            ("issuer", report["issuer"]),
            ("events", str(len(report["inclusion_proofs"]))),
            ("proofs", "ok" if report["proofs_ok"] else "FAILED"),
        ]
    _emit(args, report, rows)
    return 0 if ok else 1


def cmd_vote_round(args) -> int:
    node = _open_node(args)
    if args.round_action == "open":
        rnd = node.voting.open_round(
            subject_hash=args.subject,
            voters=[v for v in args.voters.split(",") if v],
            quorum=args.quorum if args.quorum is not None else node.config.quorum,
            threshold=(
                _threshold(args.threshold) if args.threshold else node.config.threshold
            ),
            author=args.author or node.credentials.authority.actor_id,
        )
        wire = rnd.to_wire()
        _emit(
            args,
            wire,
            [
                ("round", wire["round_id"]),
                ("subject", wire["subject_hash"]),
                ("quorum", str(wire["quorum"])),
                ("threshold", f"{wire['threshold_num']}/{wire['threshold_den']}"),
                ("voters", str(len(rnd.eligible_voters))),
            ],
        )
    elif args.round_action == "close":
        tally = node.voting.close_round(
            args.round_id, author=args.author or node.credentials.authority.actor_id
        )
        wire = tally.to_wire()
        _emit(
            args,
            wire,
            [
                ("round", wire["round_id"]),
                ("total", str(wire["total"])),
                ("approvals", str(wire["counts"].get(APPROVE_OPTION, 0))),
                ("passing", "yes" if wire["passing"] else "no"),
            ],
        )
    else:  # show
        rnd = node.voting.get_round(args.round_id)
        tally = node.voting.get_tally(args.round_id)
        wire = rnd.to_wire()
        wire["tally"] = tally.to_wire() if tally else None
        _emit(
            args,
            wire,
            [
                ("round", wire["round_id"]),
                ("open", "yes" if wire["open"] else "no"),
                ("cast", str(wire["total_cast"])),
                ("counts", json.dumps(wire["counts"], sort_keys=True)),
            ],
        )
    return 0


def cmd_sim_run(args) -> int:
    script = Path(args.script).read_text(encoding="utf-8")
    network = network_from_script(script, seed=args.seed)
    nodes = {
        node_id: {
            "chain_digest": node.chain_digest(),
            "height": node.ledger.height,
            "tip_hash": node.ledger.tip_hash,
        }
        for node_id, node in sorted(network.nodes.items())
    }
    payload = {"difficulty": network.difficulty, "nodes": nodes, "seed": args.seed}
    rows = [("difficulty", str(network.difficulty)), ("seed", str(args.seed))]
    rows += [
        (node_id, f"height={info['height']} digest={info['chain_digest'][:16]}…")
        for node_id, info in nodes.items()
    ]
    _emit(args, payload, rows)
    return 0


def cmd_export_chain(args) -> int:
    node = _open_node(args)
    blocks = node.export_chain()
    document = {"blocks": blocks, "height": node.ledger.height, "tip_hash": node.ledger.tip_hash}
    if args.out:
        Path(args.out).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
        _emit(
            args,
            {"blocks": len(blocks), "out": args.out, "tip_hash": node.ledger.tip_hash},
            [("blocks", str(len(blocks))), ("written to", args.out)],
        )
    elif args.output == "machine-readable":
        print(json.dumps(document, sort_keys=True))
    else:
        rows = [("blocks", str(len(blocks))), ("tip", node.ledger.tip_hash)]
        for block in blocks:
            header = block["header"]
            rows.append(
                (
                    f"#{header['height']}",
                    f"events={len(block['events'])} nonce={header['nonce']}",
                )
            )
        _emit(args, document, rows)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medalchain", description="Hybrid badge network node."
    )
    parser.add_argument(
        "--data-dir", default=None, help="node data directory (or MEDALCHAIN_DATA_DIR)"
    )
    parser.add_argument(
        "--output",
        choices=("table", "machine-readable"),
        default="table",
        help="render results for humans or for scripts",
    )
    sub = parser.add_subparsers(dest="command")

    p_init = sub.add_parser("init", help="initialise a fresh node data directory")
    p_init.add_argument("--difficulty", type=int, default=8)
    p_init.add_argument("--quorum", type=int, default=10)
    p_init.add_argument("--threshold", default="3/5")
    p_init.add_argument("--key-bits", type=int, default=DEFAULT_KEY_BITS)
    p_init.add_argument("--host", default="127.0.0.1")
    p_init.add_argument("--port", type=int, default=8000)
    p_init.add_argument("--authority-id", default="central-authority")
    p_init.add_argument("--key-seed", type=int, default=None, help="deterministic key (tests)")
    p_init.set_defaults(handler=cmd_init)

    p_serve = sub.add_parser("serve", help="serve the node over HTTP")
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.set_defaults(handler=cmd_serve)

    p_keygen = sub.add_parser("keygen", help="generate an RSA key pair")
    p_keygen.add_argument("--bits", type=int, default=DEFAULT_KEY_BITS)
    p_keygen.add_argument("--seed", type=int, default=None)
    p_keygen.add_argument("--out", default=None, help="write the secret key to this file")
    p_keygen.set_defaults(handler=cmd_keygen)

    p_define = sub.add_parser("define", help="register a badge definition")
    p_define.add_argument("--name", required=True)
    p_define.add_argument("--icon", required=True, help="content hash of the icon")
    p_define.add_argument("--description", required=True)
    p_define.add_argument("--criteria", required=True)
    p_define.add_argument("--grades", required=True, help="comma-separated grade levels")
    p_define.add_argument("--issuer", required=True)
    p_define.set_defaults(handler=cmd_define)

    p_mint = sub.add_parser("mint", help="mint a badge token")
    p_mint.add_argument("--definition", required=True)
    p_mint.add_argument("--holder", required=True)
    p_mint.add_argument("--grade", required=True)
    p_mint.add_argument("--issuer", default=None, help="defaults to the definition's issuer")
    p_mint.set_defaults(handler=cmd_mint)

    p_verify = sub.add_parser("verify", help="verify a token against the chain")
    p_verify.add_argument("token_id")
    p_verify.set_defaults(handler=cmd_verify)

    p_round = sub.add_parser("vote-round", help="manage anonymous voting rounds")
    round_sub = p_round.add_subparsers(dest="round_action", required=True)
    p_open = round_sub.add_parser("open")
    p_open.add_argument("--subject", required=True, help="hash of the question under vote")
    p_open.add_argument("--voters", required=True, help="comma-separated voter ids")
    p_open.add_argument("--quorum", type=int, default=None)
    p_open.add_argument("--threshold", default=None)
    p_open.add_argument("--author", default=None)
    p_close = round_sub.add_parser("close")
    p_close.add_argument("round_id")
    p_close.add_argument("--author", default=None)
    p_show = round_sub.add_parser("show")
    p_show.add_argument("round_id")
    p_round.set_defaults(handler=cmd_vote_round)

    p_sim = sub.add_parser("sim", help="deterministic network simulation")
    sim_sub = p_sim.add_subparsers(dest="sim_action", required=True)
    p_run = sim_sub.add_parser("run")
    p_run.add_argument("script", help="scenario script file")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.set_defaults(handler=cmd_sim_run)

    p_export = sub.add_parser("export-chain", help="dump the chain as JSON")
    p_export.add_argument("--out", default=None)
    p_export.set_defaults(handler=cmd_export_chain)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = getattr(args, "handler", None)
    if handler is None:
        parser.print_help()
        return 2
    try:
        return handler(args)
    except MedalChainError as exc:
        _fail(args, exc.code, str(exc))
        return 1
    except FileExistsError as exc:
        _fail(args, "AlreadyInitialised", str(exc))
        return 1
    except (FileNotFoundError, OSError) as exc:
        _fail(args, type(exc).__name__, str(exc))
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
