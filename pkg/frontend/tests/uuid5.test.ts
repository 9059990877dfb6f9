import { describe, expect, it } from "vitest";
import { PIPELINE_NAMESPACE, uuid5, uuidToBytes } from "../src/uuid5";

const NAMESPACE_DNS = "6ba7b810-9dad-11d1-80b4-00c04fd430c8";
const NAMESPACE_URL = "6ba7b811-9dad-11d1-80b4-00c04fd430c8";

describe("uuid5", () => {
  it("reproduces the RFC 4122 reference value", () => {
    // uuid.uuid5(uuid.NAMESPACE_DNS, "python.org")
    expect(uuid5(NAMESPACE_DNS, "python.org")).toBe("886313e1-3b8a-5372-9b90-0c9aee199e5d");
  });

  it("derives the pipeline namespace the backend uses", () => {
    expect(uuid5(NAMESPACE_URL, "tsods-pipeline")).toBe(PIPELINE_NAMESPACE);
    expect(PIPELINE_NAMESPACE).toBe("47591241-a11b-5fd6-9774-52b6ee4a365f");
  });

  it("sets version and variant bits", () => {
    const id = uuid5(NAMESPACE_DNS, "anything at all");
    expect(id[14]).toBe("5");
    expect(["8", "9", "a", "b"]).toContain(id[19]);
  });

  it("is deterministic and name-sensitive", () => {
    expect(uuid5(NAMESPACE_DNS, "x")).toBe(uuid5(NAMESPACE_DNS, "x"));
    expect(uuid5(NAMESPACE_DNS, "x")).not.toBe(uuid5(NAMESPACE_DNS, "y"));
  });

  it("rejects malformed namespace strings", () => {
    expect(() => uuidToBytes("not-a-uuid")).toThrow();
    expect(() => uuidToBytes("6BA7B810-9DAD-11D1-80B4-00C04FD430C8")).toThrow(); // lowercase only
  });
});
