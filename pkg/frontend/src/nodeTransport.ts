/** Transport over a child process's stdio (the gw-lsp server). */

import { ChildProcess, spawn } from "child_process";
import { Transport } from "./protocol";

export interface ProcessTransport extends Transport {
    process: ChildProcess;
    dispose(): void;
}

export function spawnServerTransport(command: string, args: string[]): ProcessTransport {
    const child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    const dataListeners: Array<(chunk: Uint8Array) => void> = [];
    const closeListeners: Array<() => void> = [];
    child.stdout!.on("data", (chunk: Buffer) => {
        for (const listener of dataListeners) {
            listener(chunk);
        }
    });
    child.on("exit", () => {
        for (const listener of closeListeners) {
            listener();
        }
    });
    return {
        process: child,
        write(data: Uint8Array): void {
            child.stdin!.write(data);
        },
        onData(listener: (chunk: Uint8Array) => void): void {
            dataListeners.push(listener);
        },
        onClose(listener: () => void): void {
            closeListeners.push(listener);
        },
        dispose(): void {
            child.kill();
        },
    };
}
