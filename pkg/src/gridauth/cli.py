"""Command-line front end.

Settings resolve as: command-line flag > ``GRIDAUTH_*`` environment
variable > ``--config`` JSON file > built-in default.
"""
from __future__ import annotations

import json
import os
import random
import secrets
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional

import click
from click.core import ParameterSource

from gridauth import accounting, kernels, protocol, wire
from gridauth.errors import GridAuthError, LocalAuthFailure, ProtocolError
from gridauth.fuzzy import FEParams
from gridauth.group import HASHES, get_profile, validate_curve
from gridauth.netsim import World, run_attack_suite


@dataclass
class CliConfig:
    curve: str = "p256"
    profiles: Optional[str] = None
    hash: str = "sha256"
    delta_t: int = protocol.DEFAULT_DELTA_T
    fe_k: int = 128
    fe_rho: int = 5
    seed: int = 0
    latency: int = 5
    server_id: str = protocol.DEFAULT_SERVER_ID
    out: Optional[str] = None
    format: str = "text"

    @property
    def fe(self) -> FEParams:
        return FEParams(self.fe_k, self.fe_rho)

    def curve_params(self):
        return validate_curve(get_profile(self.curve, self.profiles))

    def world(self, **kw) -> World:
        return World(self.seed, curve=self.curve_params(), delta_t=self.delta_t, fe=self.fe,
                     hash_id=self.hash, latency=self.latency, server_id=self.server_id, **kw)


def _config_file_values(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise click.UsageError("cannot read config file %s: %s" % (path, exc))
    names = {f.name for f in fields(CliConfig)} | {"fe_n"}
    unknown = set(doc) - names
    if unknown:
        raise click.UsageError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    return doc


def resolve_config(ctx: click.Context, **opts) -> CliConfig:
    values = {}
    file_values = _config_file_values(opts.pop("config"))
    values.update(file_values)
    for name, value in opts.items():
        if value is None:
            continue
        if ctx.get_parameter_source(name) in (ParameterSource.DEFAULT, ParameterSource.DEFAULT_MAP):
            continue
        values[name] = value
    fe_n = values.pop("fe_n", None)
    cfg = CliConfig(**values)
    cfg.explicit = set(values)
    if fe_n is not None:
        k_set = "fe_k" in values
        rho_set = "fe_rho" in values
        if k_set and rho_set:
            if cfg.fe_k * cfg.fe_rho != fe_n:
                raise click.UsageError("--fe-n must equal --fe-k * --fe-rho")
        elif k_set:
            if fe_n % cfg.fe_k:
                raise click.UsageError("--fe-n is not a multiple of --fe-k")
            cfg.fe_rho = fe_n // cfg.fe_k
        else:
            if fe_n % cfg.fe_rho:
                raise click.UsageError("--fe-n is not a multiple of --fe-rho")
            cfg.fe_k = fe_n // cfg.fe_rho
    if cfg.hash not in HASHES:
        raise click.UsageError("unknown hash %r (have: %s)" % (cfg.hash, ", ".join(HASHES)))
    if cfg.format not in ("text", "kv"):
        raise click.UsageError("--format must be text or kv")
    try:
        cfg.fe
        cfg.curve_params()
    except (GridAuthError, ValueError, OSError) as exc:
        raise click.UsageError(str(exc))
    return cfg


def common_options(fn):
    opts = [
        click.option("--config", envvar="GRIDAUTH_CONFIG", type=click.Path(dir_okay=False),
                     help="JSON file with default settings."),
        click.option("--curve", envvar="GRIDAUTH_CURVE", help="Curve profile name."),
        click.option("--profiles", envvar="GRIDAUTH_PROFILES", type=click.Path(dir_okay=False),
                     help="JSON file of curve profiles (default: bundled)."),
        click.option("--hash", "hash", envvar="GRIDAUTH_HASH", help="Hash function id."),
        click.option("--seed", envvar="GRIDAUTH_SEED", type=int, help="Simulation seed."),
        click.option("--delta-t", envvar="GRIDAUTH_DELTA_T", type=int,
                     help="Freshness window in ms."),
        click.option("--latency", envvar="GRIDAUTH_LATENCY", type=int,
                     help="Simulated per-hop latency in ms."),
        click.option("--fe-n", envvar="GRIDAUTH_FE_N", type=int, help="Template length in bits."),
        click.option("--fe-k", envvar="GRIDAUTH_FE_K", type=int, help="Secret length in bits."),
        click.option("--fe-rho", envvar="GRIDAUTH_FE_RHO", type=int, help="Repetition factor."),
        click.option("--server-id", envvar="GRIDAUTH_SERVER_ID", help="Server identity string."),
        click.option("--out", envvar="GRIDAUTH_OUT", type=click.Path(dir_okay=False),
                     help="Output file."),
        click.option("--format", "format", envvar="GRIDAUTH_FORMAT",
                     type=click.Choice(["text", "kv"]), help="Report format."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _write(cfg: CliConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
        click.echo("wrote %s" % cfg.out)


def _fail(step: str, exc: Exception, code: int = 1):
    click.echo("FAILED at %s: %s: %s" % (step, type(exc).__name__, exc), err=True)
    sys.exit(code)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """ECC and biometric mutual authentication for smart-grid links."""


@main.command("show-config")
@common_options
@click.pass_context
def show_config(ctx, **opts):
    """Print the resolved configuration."""
    cfg = resolve_config(ctx, **opts)
    doc = asdict(cfg)
    doc["fe_n"] = cfg.fe.n
    doc["kernel_backend"] = kernels.BACKEND
    for k in sorted(doc):
        click.echo("%s = %s" % (k, doc[k]))


@main.command()
@common_options
@click.option("--state-dir", type=click.Path(file_okay=False),
              help="Also persist server and device state here.")
@click.pass_context
def demo(ctx, state_dir, **opts):
    """Set up, register one meter, authenticate, and compare keys."""
    cfg = resolve_config(ctx, **opts)
    world = cfg.world()
    try:
        world.register("meter-0001")
        session = world.login("meter-0001")
    except ProtocolError as exc:
        click.echo(world.transcript.to_text())
        _fail("handshake", exc)
    lines = ["profile=%s seed=%d delta_t=%d" % (cfg.curve, cfg.seed, cfg.delta_t), ""]
    lines.append(world.transcript.to_text())
    lines.append("")
    for i in (session.a1_index, session.a2_index):
        e = world.transcript[i]
        lines.append("%s (%s, %s):" % (e.kind, e.direction, e.channel))
        lines.append(wire.message_text(world.decode(e.kind, e.payload), world.params.curve))
    lines += ["", "SK_US = %s" % session.sk_user.hex(), "SK_SU = %s" % session.sk_server.hex()]
    same = session.sk_user == session.sk_server
    lines.append("keys match" if same else "KEYS DIFFER")
    text = "\n".join(lines) + "\n"
    click.echo(text, nl=False)
    _write(cfg, text)
    if state_dir:
        os.makedirs(state_dir, exist_ok=True)
        with open(os.path.join(state_dir, "server.json"), "w") as fh:
            fh.write(wire.dump_server(world.server))
        with open(os.path.join(state_dir, "device.json"), "w") as fh:
            fh.write(wire.dump_device(world.devices["meter-0001"], world.params))
    sys.exit(0 if same else 1)


@main.command("update-demo")
@common_options
@click.pass_context
def update_demo(ctx, **opts):
    """Enroll, update password and biometric, and check old/new credentials."""
    cfg = resolve_config(ctx, **opts)
    world = cfg.world()
    uid = "meter-0001"
    step = "enroll"
    try:
        old = world.register(uid)
        step = "authenticate"
        world.login(uid)
        step = "update with wrong old password"
        before = world.devices[uid]
        try:
            world.update(uid, "never-used", world.random_template(), pw_old=old.pw + "!")
        except LocalAuthFailure:
            click.echo("update with wrong old password: refused (LocalAuthFailure, expected)")
        else:
            raise ProtocolError("update accepted a wrong old password")
        if world.devices[uid] != before:
            raise ProtocolError("refused update changed the device state")
        step = "old credentials after refused update"
        world.login(uid)
        click.echo("old credentials after refused update: accepted")
        step = "update"
        new_pw, new_b = "rotated-" + old.pw, world.random_template()
        world.update(uid, new_pw, new_b)
        click.echo("update: done")
        step = "re-authenticate with new credentials"
        s = world.login(uid)
        if s.sk_user != s.sk_server:
            raise ProtocolError("session keys differ after update")
        click.echo("new credentials: accepted, keys match")
        step = "old credentials after update"
        try:
            world.user_send_a1(uid, pw=old.pw, template=world.noisy(old.template))
        except LocalAuthFailure:
            click.echo("old credentials: LocalAuthFailure (expected)")
        else:
            raise ProtocolError("old credentials still accepted")
    except ProtocolError as exc:
        _fail(step, exc)
    click.echo("update demo passed")


@main.command()
@common_options
@click.option("--server-state", type=click.Path(dir_okay=False),
              help="Run against a persisted server state file.")
@click.pass_context
def attacks(ctx, server_state, **opts):
    """Run the adversary scenario suite and write a report."""
    cfg = resolve_config(ctx, **opts)
    kw = {}
    if server_state:
        try:
            with open(server_state) as fh:
                kw["server"] = wire.load_server(fh.read())
        except (OSError, GridAuthError) as exc:
            _fail("loading server state", exc, code=2)
    else:
        kw.update(curve=cfg.curve_params(), delta_t=cfg.delta_t, fe=cfg.fe, hash_id=cfg.hash,
                  server_id=cfg.server_id)
    report = run_attack_suite(cfg.seed, latency=cfg.latency, **kw)
    text = report.to_kv() if cfg.format == "kv" else report.to_text()
    click.echo(report.to_text() if cfg.out else text, nl=False)
    _write(cfg, text)
    if not report.ok:
        click.echo("failed scenarios: %s" % ", ".join(o.name for o in report.failures), err=True)
        sys.exit(1)


@main.command()
@common_options
@click.pass_context
def bench(ctx, **opts):
    """Count operations per protocol step and measure message sizes."""
    cfg = resolve_config(ctx, **opts)
    rep = accounting.measure(cfg.curve_params(), cfg.seed, cfg.hash, cfg.fe, cfg.delta_t)
    text = rep.to_kv() if cfg.format == "kv" else rep.to_text()
    click.echo(text, nl=False)
    _write(cfg, text)


@main.command()
@common_options
@click.pass_context
def keygen(ctx, **opts):
    """Emit a fresh server state (secret key included).

    The secret comes from the OS unless a seed is set explicitly.
    """
    cfg = resolve_config(ctx, **opts)
    rng = random.Random(cfg.seed) if "seed" in cfg.explicit else secrets.SystemRandom()
    _, server = protocol.setup(cfg.curve_params(), rng, server_id=cfg.server_id,
                               delta_t=cfg.delta_t, hash_id=cfg.hash, fe=cfg.fe)
    text = wire.dump_server(server)
    if cfg.out:
        _write(cfg, text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
