use std::fmt::Write;

use super::ext::{
    decode_key_share_client, decode_key_share_server, decode_supported_versions_client,
    decode_supported_versions_server, extension_name, Extensions, SsiParameters, EXT_KEY_SHARE,
    EXT_SIGNATURE_ALGORITHMS, EXT_SSI_PARAMETERS, EXT_SUPPORTED_VERSIONS,
};
use super::{HandshakeMessage, HandshakeTranscript};
use crate::crypto::SignatureSuite;

fn scheme_name(code: u16) -> String {
    SignatureSuite::from_scheme(code)
        .map(|s| s.ietf_name().to_string())
        .unwrap_or_else(|| format!("0x{code:04x}"))
}

fn short_hex(b: &[u8]) -> String {
    if b.len() <= 16 {
        hex::encode(b)
    } else {
        format!("{}..({} bytes)", hex::encode(&b[..8]), b.len())
    }
}

fn dump_extensions(out: &mut String, exts: &Extensions, server_side: bool) {
    for e in &exts.0 {
        let name = extension_name(e.typ).unwrap_or("unknown");
        let detail = match e.typ {
            EXT_SSI_PARAMETERS => SsiParameters::decode(&e.data).map(|p| p.to_string()).ok(),
            EXT_SIGNATURE_ALGORITHMS => exts.signature_algorithms().ok().flatten().map(|l| {
                l.into_iter().map(scheme_name).collect::<Vec<_>>().join(", ")
            }),
            EXT_SUPPORTED_VERSIONS if server_side => {
                decode_supported_versions_server(&e.data).ok().map(|v| format!("0x{v:04x}"))
            }
            EXT_SUPPORTED_VERSIONS => decode_supported_versions_client(&e.data)
                .ok()
                .map(|l| l.iter().map(|v| format!("0x{v:04x}")).collect::<Vec<_>>().join(", ")),
            EXT_KEY_SHARE if server_side => decode_key_share_server(&e.data)
                .ok()
                .map(|(g, k)| format!("group=0x{g:04x} key={}", short_hex(&k))),
            EXT_KEY_SHARE => decode_key_share_client(&e.data).ok().map(|l| {
                l.iter()
                    .map(|(g, k)| format!("group=0x{g:04x} key={}", short_hex(k)))
                    .collect::<Vec<_>>()
                    .join("; ")
            }),
            _ => None,
        };
        let _ = writeln!(
            out,
            "  ext {name}({}) len={}: {}",
            e.typ,
            e.data.len(),
            detail.unwrap_or_else(|| short_hex(&e.data))
        );
    }
}

/// Human-readable rendering of one message, one field per line.
pub fn dump(msg: &HandshakeMessage) -> String {
    let mut out = String::new();
    let len = msg.encode().len() - super::msgs::HEADER_LEN;
    let _ = writeln!(out, "{}({}) len={len}", msg.name(), msg.typ());
    match msg {
        HandshakeMessage::ClientHello(m) => {
            let _ = writeln!(out, "  random={}", short_hex(&m.random));
            let suites: Vec<String> = m.cipher_suites.iter().map(|c| format!("0x{c:04x}")).collect();
            let _ = writeln!(out, "  cipher_suites=[{}]", suites.join(", "));
            dump_extensions(&mut out, &m.extensions, false);
        }
        HandshakeMessage::ServerHello(m) => {
            let _ = writeln!(out, "  random={}", short_hex(&m.random));
            let _ = writeln!(out, "  cipher_suite=0x{:04x}", m.cipher_suite);
            dump_extensions(&mut out, &m.extensions, true);
        }
        HandshakeMessage::EncryptedExtensions(m) => dump_extensions(&mut out, &m.extensions, true),
        HandshakeMessage::CertificateRequest(m) => dump_extensions(&mut out, &m.extensions, true),
        HandshakeMessage::SsiRequest(m) => dump_extensions(&mut out, &m.extensions, true),
        HandshakeMessage::Certificate(m) => {
            for (i, e) in m.entries.iter().enumerate() {
                let _ = writeln!(out, "  cert[{i}] {} bytes", e.cert_data.len());
            }
        }
        HandshakeMessage::CertificateVerify(s) | HandshakeMessage::DidVerify(s) => {
            let _ = writeln!(out, "  scheme={} signature={}", scheme_name(s.scheme), short_hex(&s.signature));
        }
        HandshakeMessage::Vc(m) => {
            let _ = writeln!(out, "  vc {} bytes", m.vc.len());
        }
        HandshakeMessage::Did(m) => {
            let _ = writeln!(out, "  method={} did={}", m.method, String::from_utf8_lossy(&m.did));
        }
        HandshakeMessage::Finished(m) => {
            let _ = writeln!(out, "  verify_data={}", short_hex(&m.verify_data));
        }
    }
    out
}

pub fn dump_transcript(t: &HandshakeTranscript) -> String {
    t.entries()
        .iter()
        .map(|e| format!("[{}] {}", e.sender.as_str(), dump(&e.message)))
        .collect()
}
