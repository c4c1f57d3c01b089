import json
import os
from pathlib import Path

import pytest
from hypothesis import settings

from uisync.local_agent import AgentConfig, EndpointConfig, LocalAgent
from uisync.protocol import SessionKey
from uisync.remote_agent import RemoteAgent
from uisync.screen import load_screen_spec

settings.register_profile("ci", settings(max_examples=300, deadline=None))
settings.register_profile("dev", settings(max_examples=100, deadline=None))
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
KEY_HEX = "8e7d3f2a1b4c5d6e7f8091a2b3c4d5e6"


@pytest.fixture(scope="session")
def key() -> SessionKey:
    return SessionKey.from_hex(KEY_HEX)


@pytest.fixture(scope="session")
def spec_1920():
    return load_screen_spec(FIXTURES / "demo_remote_1920.json")


@pytest.fixture(scope="session")
def spec_800():
    return load_screen_spec(FIXTURES / "demo_remote_800.json")


def make_remote(spec, key, **kwargs) -> RemoteAgent:
    agent = RemoteAgent(spec, key, port=0, **kwargs)
    agent.start()
    return agent


def make_agent_config(ports_ifaces, mapping_path=None, **overrides) -> AgentConfig:
    endpoints = tuple(
        EndpointConfig("127.0.0.1", port, iface) for port, iface in ports_ifaces
    )
    return AgentConfig(
        endpoints=endpoints,
        session_key_hex=KEY_HEX,
        mapping_path=str(mapping_path or FIXTURES / "demo_mapping.json"),
        **overrides,
    )


@pytest.fixture
def two_remotes(spec_1920, spec_800, key):
    ra = make_remote(spec_1920, key)
    rb = make_remote(spec_800, key)
    yield ra, rb
    ra.stop()
    rb.stop()


@pytest.fixture
def live_agent(two_remotes):
    ra, rb = two_remotes
    config = make_agent_config([(ra.port, "remote-a"), (rb.port, "remote-b")])
    agent = LocalAgent(config)
    agent.start()
    states = agent.wait_ready()
    assert set(states.values()) == {"up"}, states
    yield agent, ra, rb
    agent.stop()


def write_config_file(tmp_path: Path, ports_ifaces, **overrides) -> Path:
    doc = {
        "endpoints": [
            {"host": "127.0.0.1", "port": port, "interface_id": iface}
            for port, iface in ports_ifaces
        ],
        "session_key_hex": KEY_HEX,
        "mapping_path": str(FIXTURES / "demo_mapping.json"),
        **overrides,
    }
    path = tmp_path / "agent_config.json"
    path.write_text(json.dumps(doc))
    return path
