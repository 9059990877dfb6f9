import { readFileSync, readdirSync } from "node:fs";
import { resolve } from "node:path";
import { flattenRegistry, type Registry, type RegistryJson } from "../src/types";

// resolved from the package root so it works in both node and DOM test environments
const FIXTURES = resolve(process.cwd(), "tests/fixtures");

export function readFixture(name: string): string {
  return readFileSync(`${FIXTURES}/${name}`, "utf8");
}

export function loadRegistryJson(): RegistryJson {
  return JSON.parse(readFixture("primitives.json")) as RegistryJson;
}

export function loadRegistry(): Registry {
  return flattenRegistry(loadRegistryJson());
}

// name -> exact file text, for byte-level round-trip checks
export function loadPipelineFixtures(): Map<string, string> {
  const out = new Map<string, string>();
  for (const file of readdirSync(`${FIXTURES}/pipelines`).sort()) {
    out.set(file, readFileSync(`${FIXTURES}/pipelines/${file}`, "utf8"));
  }
  return out;
}
