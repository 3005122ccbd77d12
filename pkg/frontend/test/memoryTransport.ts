/** A pair of in-memory transports wired back to back. */

import { Transport } from "../src/protocol";

class MemoryEnd implements Transport {
    private listeners: Array<(chunk: Uint8Array) => void> = [];
    peer?: MemoryEnd;

    write(data: Uint8Array): void {
        // deliver asynchronously like a real pipe would
        const peer = this.peer!;
        queueMicrotask(() => {
            for (const listener of peer.listeners) {
                listener(data);
            }
        });
    }

    onData(listener: (chunk: Uint8Array) => void): void {
        this.listeners.push(listener);
    }
}

export function transportPair(): [Transport, Transport] {
    const a = new MemoryEnd();
    const b = new MemoryEnd();
    a.peer = b;
    b.peer = a;
    return [a, b];
}
