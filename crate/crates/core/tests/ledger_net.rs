use std::sync::Arc;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use ssi_tls::crypto::{KeyPair, SignatureSuite};
use ssi_tls::identity::{DidMethod, DidMethodId, Resolution};
use ssi_tls::ledger::{
    mitm_resolution_attack, AttackPosition, ChannelMode, LedgerClient, LedgerDeployment,
    LedgerError, LedgerServer, LedgerStore, RemoteLedgerClient, ServerChannel,
};
use ssi_tls::handshake::{HandshakeError, SsiIdentity};
use ssi_tls::pki::issue_chain;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn resolve_over_authenticated_channel() {
    let mut r = rng(1);
    let node = issue_chain(SignatureSuite::EcdsaSecp256r1Sha256, "ledger.example", &mut r).unwrap();
    let store = Arc::new(LedgerStore::in_memory(DidMethodId::IOTA));
    let server = LedgerServer::start("127.0.0.1:0", ServerChannel::Tls(node.identity.clone()), store.clone()).unwrap();
    let mode = ChannelMode::Authenticated { trust_anchors: vec![node.root.clone()] };
    let remote = RemoteLedgerClient::new(server.local_addr(), mode);
    let method = DidMethod::new(DidMethodId::IOTA, Arc::new(remote.clone()));

    let (did, keys) = method.did_create(SignatureSuite::Ed25519, &mut r).unwrap();
    assert_eq!(store.record_count(), 1);
    let Resolution::Document(doc) = method.did_resolve(&did).unwrap() else { panic!("revoked") };
    assert_eq!(doc.authentication_key().unwrap().1, keys.public_key());

    let next = KeyPair::generate(SignatureSuite::Ed25519, &mut r);
    method.did_update(&did, &keys, &next, &mut r).unwrap();
    assert_eq!(remote.get(did.method_specific_id()).unwrap().unwrap().sequence, 1);
    // The old key no longer controls the document.
    let err = method.did_deactivate(&did, &keys, &mut r).unwrap_err();
    assert!(err.to_string().contains("signature"), "{err}");
    method.did_deactivate(&did, &next, &mut r).unwrap();
    assert_eq!(method.did_resolve(&did).unwrap(), Resolution::Revoked);
    assert_eq!(remote.get("unknown").unwrap(), None);
}

#[test]
fn wrong_trust_anchor_is_a_channel_error() {
    let mut r = rng(2);
    let node = issue_chain(SignatureSuite::Ed25519, "ledger.example", &mut r).unwrap();
    let other = issue_chain(SignatureSuite::Ed25519, "other.example", &mut r).unwrap();
    let store = Arc::new(LedgerStore::in_memory(DidMethodId::IOTA));
    let server = LedgerServer::start("127.0.0.1:0", ServerChannel::Tls(node.identity), store).unwrap();
    let remote = RemoteLedgerClient::new(
        server.local_addr(),
        ChannelMode::Authenticated { trust_anchors: vec![other.root] },
    );
    assert!(matches!(remote.get("x"), Err(LedgerError::Channel(_))));
}

#[test]
fn many_parallel_resolvers() {
    let mut r = rng(3);
    let node = issue_chain(SignatureSuite::Ed25519, "ledger.example", &mut r).unwrap();
    let store = Arc::new(LedgerStore::in_memory(DidMethodId::BTCR));
    let server = LedgerServer::start("127.0.0.1:0", ServerChannel::Tls(node.identity), store.clone()).unwrap();
    let remote = RemoteLedgerClient::new(
        server.local_addr(),
        ChannelMode::Authenticated { trust_anchors: vec![node.root] },
    );
    let method = DidMethod::new(DidMethodId::BTCR, store.clone());
    let (did, _) = method.did_create(SignatureSuite::Ed25519, &mut r).unwrap();
    let handles: Vec<_> = (0..100)
        .map(|_| {
            let remote = remote.clone();
            let id = did.method_specific_id().to_string();
            thread::spawn(move || remote.get(&id))
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap().unwrap().unwrap().sequence, 0);
    }
}

#[test]
fn restart_recovers_from_log() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iota.log");
    let mut r = rng(4);
    let did = {
        let store = Arc::new(LedgerStore::open(&path, DidMethodId::IOTA).unwrap());
        let server = LedgerServer::start("127.0.0.1:0", ServerChannel::PlaintextInsecure, store).unwrap();
        let remote = RemoteLedgerClient::new(server.local_addr(), ChannelMode::PlaintextInsecure);
        DidMethod::new(DidMethodId::IOTA, Arc::new(remote)).did_create(SignatureSuite::EcdsaSecp256r1Sha256, &mut r).unwrap().0
    };
    let store = LedgerStore::open(&path, DidMethodId::IOTA).unwrap();
    assert_eq!(store.latest(did.method_specific_id()).unwrap().sequence, 0);
}

#[test]
fn resolution_attack_dichotomy() {
    let mut r = rng(5);
    let suite = SignatureSuite::Ed25519;
    let node = issue_chain(SignatureSuite::EcdsaSecp256r1Sha256, "ledger.example", &mut r).unwrap();
    let impostor = issue_chain(SignatureSuite::EcdsaSecp256r1Sha256, "ledger.example", &mut r).unwrap().identity;
    let ledger = LedgerDeployment {
        method: DidMethodId::IOTA,
        store: Arc::new(LedgerStore::in_memory(DidMethodId::IOTA)),
        node,
    };
    let method = DidMethod::new(ledger.method, ledger.store.clone());
    let (victim, _) = method.did_create(suite, &mut r).unwrap();
    let attacker = KeyPair::generate(suite, &mut r);
    let (did, keys) = method.did_create(suite, &mut r).unwrap();
    let relying = SsiIdentity { did, keys, credential: None };

    let run = |plaintext, pos, r: &mut ChaCha20Rng| {
        mitm_resolution_attack(&attacker, &victim, &relying, &ledger, plaintext, pos, &impostor, r).unwrap()
    };
    let insecure = run(true, AttackPosition::OnPath, &mut r);
    assert!(insecure.impersonated, "{:?}", insecure.relying);

    let secure = run(false, AttackPosition::OnPath, &mut r);
    assert!(!secure.impersonated);
    assert!(matches!(secure.relying, Err(HandshakeError::ResolutionFailure(_))), "{:?}", secure.relying);

    for plaintext in [true, false] {
        let baseline = run(plaintext, AttackPosition::Baseline, &mut r);
        assert!(!baseline.impersonated);
        assert!(matches!(baseline.relying, Err(HandshakeError::BadSignature(_))), "{:?}", baseline.relying);
    }
}
