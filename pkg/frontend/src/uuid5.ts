// Name-based UUIDs (version 5): SHA-1 of namespace bytes + name bytes with
// version and variant bits patched in. Matches RFC 4122, so ids derived
// here agree with any other implementation given the same inputs.

import { sha1 } from "./sha1";

const UUID_RE = /^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$/;

export function uuidToBytes(uuid: string): Uint8Array {
  if (!UUID_RE.test(uuid)) throw new Error(`not a uuid: ${uuid}`);
  const hex = uuid.replaceAll("-", "");
  const out = new Uint8Array(16);
  for (let i = 0; i < 16; i++) out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16);
  return out;
}

function bytesToUuid(bytes: Uint8Array): string {
  const hex = [...bytes].map((b) => b.toString(16).padStart(2, "0")).join("");
  return [hex.slice(0, 8), hex.slice(8, 12), hex.slice(12, 16),
          hex.slice(16, 20), hex.slice(20, 32)].join("-");
}

export function uuid5(namespace: string, name: string): string {
  const nameBytes = new TextEncoder().encode(name);
  const nsBytes = uuidToBytes(namespace);
  const joined = new Uint8Array(nsBytes.length + nameBytes.length);
  joined.set(nsBytes);
  joined.set(nameBytes, nsBytes.length);
  const digest = sha1(joined).slice(0, 16);
  digest[6] = (digest[6]! & 0x0f) | 0x50; // version 5
  digest[8] = (digest[8]! & 0x3f) | 0x80; // RFC 4122 variant
  return bytesToUuid(digest);
}

const NAMESPACE_URL = "6ba7b811-9dad-11d1-80b4-00c04fd430c8";

// Same two-level derivation the backend uses for pipeline ids.
export const PIPELINE_NAMESPACE = uuid5(NAMESPACE_URL, "tsods-pipeline");
