use super::TranscriptHash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Client,
    Server,
}

impl Role {
    pub fn peer(self) -> Role {
        match self {
            Role::Client => Role::Server,
            Role::Server => Role::Client,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Client => "client",
            Role::Server => "server",
        }
    }
}

/// Which proof-of-possession message a signature belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerifyPurpose {
    CertificateVerify,
    DidVerify,
}

pub fn context_string(role: Role, purpose: VerifyPurpose) -> &'static str {
    match (role, purpose) {
        (Role::Server, VerifyPurpose::CertificateVerify) => "TLS 1.3, server CertificateVerify",
        (Role::Client, VerifyPurpose::CertificateVerify) => "TLS 1.3, client CertificateVerify",
        (Role::Server, VerifyPurpose::DidVerify) => "TLS 1.3, server DIDVerify",
        (Role::Client, VerifyPurpose::DidVerify) => "TLS 1.3, client DIDVerify",
    }
}

/// 64 spaces, the context string, a zero separator, then the transcript hash.
pub fn build_signed_content(role: Role, purpose: VerifyPurpose, th: &TranscriptHash) -> Vec<u8> {
    let ctx = context_string(role, purpose);
    let mut out = Vec::with_capacity(64 + ctx.len() + 1 + th.0.len());
    out.extend_from_slice(&[0x20; 64]);
    out.extend_from_slice(ctx.as_bytes());
    out.push(0);
    out.extend_from_slice(&th.0);
    out
}
