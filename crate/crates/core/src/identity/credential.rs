use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use rand_core::CryptoRngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{canonical_json, split_did_url, Did, IdentityError, TrustStore};
use crate::crypto::{verify, KeyPair, SignatureSuite, Verdict};

pub const CREDENTIALS_CONTEXT: &str = "https://www.w3.org/2018/credentials/v1";
pub const VC_TYPE: &str = "VerifiableCredential";
pub const ASSERTION_METHOD: &str = "assertionMethod";

/// Why a credential was not accepted. Checks run in the order listed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcRejection {
    #[error("credential does not follow its schema: {0}")]
    Schema(String),
    #[error("credential not yet valid")]
    NotYetValid,
    #[error("credential expired")]
    Expired,
    #[error("issuer {0} is not trusted")]
    UntrustedIssuer(Did),
    #[error("issuer signature does not verify")]
    BadSignature,
}

impl VcRejection {
    pub fn code(&self) -> &'static str {
        match self {
            VcRejection::Schema(_) => "schema",
            VcRejection::NotYetValid => "not-yet-valid",
            VcRejection::Expired => "expired",
            VcRejection::UntrustedIssuer(_) => "untrusted-issuer",
            VcRejection::BadSignature => "bad-signature",
        }
    }
}

mod timestamp {
    use super::*;

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(s.trim())
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

mod multibase_bytes {
    use super::*;
    use crate::identity::{multibase_decode, multibase_encode};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&multibase_encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        multibase_decode(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialSubject {
    pub id: Did,
    #[serde(flatten)]
    pub claims: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Proof {
    #[serde(rename = "type")]
    pub type_: String,
    #[serde(with = "timestamp")]
    pub created: DateTime<Utc>,
    pub proof_purpose: String,
    pub verification_method: String,
    #[serde(with = "multibase_bytes")]
    pub proof_value: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifiableCredential {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    pub id: String,
    #[serde(rename = "type")]
    pub types: Vec<String>,
    pub issuer: Did,
    #[serde(with = "timestamp")]
    pub issuance_date: DateTime<Utc>,
    #[serde(with = "timestamp")]
    pub expiration_date: DateTime<Utc>,
    pub credential_subject: CredentialSubject,
    pub proof: Proof,
}

/// Inputs to [`vc_issue`].
#[derive(Debug, Clone)]
pub struct CredentialRequest {
    pub id: String,
    pub subject: Did,
    pub extra_types: Vec<String>,
    pub claims: BTreeMap<String, String>,
    pub valid_from: DateTime<Utc>,
    pub valid_until: DateTime<Utc>,
}

impl CredentialRequest {
    pub fn new(subject: Did, valid_from: DateTime<Utc>, valid_until: DateTime<Utc>) -> Self {
        CredentialRequest {
            id: format!("urn:vc:{}", subject.method_specific_id()),
            subject,
            extra_types: Vec::new(),
            claims: BTreeMap::new(),
            valid_from,
            valid_until,
        }
    }

    pub fn with_type(mut self, t: &str) -> Self {
        self.extra_types.push(t.to_string());
        self
    }

    pub fn with_claim(mut self, k: &str, v: &str) -> Self {
        self.claims.insert(k.to_string(), v.to_string());
        self
    }
}

fn truncate_secs(t: DateTime<Utc>) -> DateTime<Utc> {
    DateTime::from_timestamp(t.timestamp(), 0).expect("in range")
}

impl VerifiableCredential {
    /// Bytes covered by the issuer proof: canonical JSON with `proofValue` removed.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_value(self).expect("credential serializes");
        if let Some(proof) = v.get_mut("proof").and_then(|p| p.as_object_mut()) {
            proof.remove("proofValue");
        }
        canonical_json(&v)
    }

    pub fn subject(&self) -> &Did {
        &self.credential_subject.id
    }
}

/// Issues a credential signed by `issuer_keys`, which must be the key
/// registered for `issuer_did`.
pub fn vc_issue(
    issuer_keys: &KeyPair,
    issuer_did: &Did,
    request: CredentialRequest,
    rng: &mut dyn CryptoRngCore,
) -> Result<VerifiableCredential, IdentityError> {
    let from = truncate_secs(request.valid_from);
    let until = truncate_secs(request.valid_until);
    if from >= until {
        return Err(IdentityError::InvalidValidity);
    }
    let mut types = vec![VC_TYPE.to_string()];
    types.extend(request.extra_types.into_iter().filter(|t| t != VC_TYPE));
    let mut vc = VerifiableCredential {
        context: vec![CREDENTIALS_CONTEXT.to_string()],
        id: request.id,
        types,
        issuer: issuer_did.clone(),
        issuance_date: from,
        expiration_date: until,
        credential_subject: CredentialSubject { id: request.subject, claims: request.claims },
        proof: Proof {
            type_: issuer_keys.suite().w3c_name().to_string(),
            created: from,
            proof_purpose: ASSERTION_METHOD.to_string(),
            verification_method: issuer_did.with_fragment("key-1"),
            proof_value: Vec::new(),
        },
    };
    vc.proof.proof_value = issuer_keys.sign(&vc.signing_bytes(), rng);
    Ok(vc)
}

fn check_schema(vc: &VerifiableCredential) -> Result<SignatureSuite, VcRejection> {
    let schema = |m: &str| Err(VcRejection::Schema(m.to_string()));
    if vc.context.first().map(String::as_str) != Some(CREDENTIALS_CONTEXT) {
        return schema("first @context entry must be the credentials v1 context");
    }
    if !vc.types.iter().any(|t| t == VC_TYPE) {
        return schema("type must include VerifiableCredential");
    }
    if vc.issuance_date >= vc.expiration_date {
        return schema("issuanceDate must precede expirationDate");
    }
    let Some(suite) = SignatureSuite::from_w3c_name(&vc.proof.type_) else {
        return schema("unknown proof type");
    };
    if vc.proof.proof_purpose != ASSERTION_METHOD {
        return schema("proofPurpose must be assertionMethod");
    }
    match split_did_url(&vc.proof.verification_method) {
        Ok((did, _)) if did == vc.issuer => Ok(suite),
        _ => schema("verificationMethod is not controlled by the issuer"),
    }
}

/// Verifies schema, validity window, issuer trust and the issuer proof, in
/// that order. Returns the subject DID. Possession of the subject key is not
/// checked here.
pub fn vc_verify(
    vc: &VerifiableCredential,
    trust: &TrustStore,
    now: DateTime<Utc>,
) -> Result<Did, VcRejection> {
    let suite = check_schema(vc)?;
    if now < vc.issuance_date {
        return Err(VcRejection::NotYetValid);
    }
    if now > vc.expiration_date {
        return Err(VcRejection::Expired);
    }
    let (key_suite, key) = trust
        .issuer_key(&vc.issuer)
        .ok_or_else(|| VcRejection::UntrustedIssuer(vc.issuer.clone()))?;
    if key_suite != suite {
        return Err(VcRejection::BadSignature);
    }
    match verify(suite, &key, &vc.signing_bytes(), &vc.proof.proof_value) {
        Ok(Verdict::Accepted) => Ok(vc.credential_subject.id.clone()),
        _ => Err(VcRejection::BadSignature),
    }
}

pub fn vc_serialize(vc: &VerifiableCredential) -> Vec<u8> {
    canonical_json(vc)
}

pub fn vc_deserialize(bytes: &[u8]) -> Result<VerifiableCredential, IdentityError> {
    serde_json::from_slice(bytes).map_err(IdentityError::from_json)
}
