"""Lighthouse: a distributed public-randomness beacon, simulated end to end.

External producers commit to reverse hash chains and reveal values in
order; a contract mixes each reveal with a block hash mined in between,
then XORs all producers' outputs into one timestamped public pulse.  The
package also ships the proof-of-work ledger simulation, the attack
strategies, the bias measurement harness, and a verifier that recomputes
published logs from public data.
"""

from lighthouse.adversary import (
    BitBias,
    BitPredicate,
    Delayer,
    HonestMining,
    HonestProducer,
    ProducerColluder,
    Withholder,
    build_clone_chains,
)
from lighthouse.contract import (
    BeaconPulse,
    ContractEvent,
    LighthouseContract,
    LighthousePulse,
    Outcome,
    SingleProducerBeacon,
)
from lighthouse.experiments import (
    BiasReport,
    NaiveCombineReport,
    bias_experiment,
    closed_form_bias,
    naive_combine_demo,
)
from lighthouse.hashcore import (
    ChainCheckpoint,
    ChainExhausted,
    MerlinChain,
    digest_bit,
    from_hex,
    get_hash,
    keccak_256,
    link_ok,
    sha3_256,
    to_hex,
    xor_digests,
    ZERO_DIGEST,
)
from lighthouse.ledger import (
    Block,
    ChainView,
    Ledger,
    LivelockError,
    MineContext,
    MinerPool,
    TxContext,
    mine_competition,
)
from lighthouse.logverify import LogFormatError, Verdict, verify_log
from lighthouse.scenario import (
    ConfigError,
    ScenarioConfig,
    ScenarioResult,
    load_scenario,
    replay_single_producer,
    run_scenario,
    scenario_from_dict,
)

__version__ = "0.1.0"
